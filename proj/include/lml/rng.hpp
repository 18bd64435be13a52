#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace lml {

// Deterministic xoshiro256++ stream seeded through splitmix64. Every random
// choice in the toolkit flows through an explicit Rng instance, so "seed 42"
// means the same bits on every platform. Normal draws use the Marsaglia
// polar method; a call that needs an odd count discards the spare of the
// final pair, so the stream position depends only on the sequence of calls.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53 bits of mantissa.
    double uniform();

    // Unbiased integer in [0, n); n must be positive.
    std::uint64_t bounded(std::uint64_t n);

    // One N(0,1) draw (wastes the pair's spare).
    double normal();

    // n i.i.d. N(0,1) draws.
    std::vector<double> standard_normal(std::size_t n);

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Stable sub-seed derivation, for per-tree / per-cell streams.
    static std::uint64_t derive(std::uint64_t base, std::uint64_t stream);

private:
    void normal_pair(double& a, double& b);

    std::uint64_t seed_ = 0;
    std::uint64_t state_[4] = {0, 0, 0, 0};
};

// splitmix64 step; exposed because seeding and derive() are specified in
// terms of it.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace lml
