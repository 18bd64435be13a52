#include "lml/rng.hpp"

#include <cmath>

namespace lml {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    state_[0] = splitmix64(sm);
    state_[1] = splitmix64(sm);
    state_[2] = splitmix64(sm);
    state_[3] = splitmix64(sm);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
}  // namespace

std::uint64_t Rng::next_u64() {
    // xoshiro256++ (Blackman & Vigna)
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::bounded(std::uint64_t n) {
    // Modulo rejection; discards at most n-1 values out of 2^64 per draw.
    const std::uint64_t threshold = (0ULL - n) % n;
    for (;;) {
        std::uint64_t r = next_u64();
        if (r >= threshold)
            return r % n;
    }
}

void Rng::normal_pair(double& a, double& b) {
    for (;;) {
        double u = 2.0 * uniform() - 1.0;
        double v = 2.0 * uniform() - 1.0;
        double s = u * u + v * v;
        if (s >= 1.0 || s == 0.0)
            continue;
        double m = std::sqrt(-2.0 * std::log(s) / s);
        a = u * m;
        b = v * m;
        return;
    }
}

double Rng::normal() {
    double a, b;
    normal_pair(a, b);
    return a;
}

std::vector<double> Rng::standard_normal(std::size_t n) {
    std::vector<double> out(n);
    std::size_t i = 0;
    while (i + 1 < n) {
        normal_pair(out[i], out[i + 1]);
        i += 2;
    }
    if (i < n) {
        double spare;
        normal_pair(out[i], spare);
    }
    return out;
}

std::uint64_t Rng::derive(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t sm = base ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
    return splitmix64(sm);
}

}  // namespace lml
