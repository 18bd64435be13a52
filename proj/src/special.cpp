#include "lml/special.hpp"

#include <cmath>
#include <string>

#include "lml/errors.hpp"

namespace lml {

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

constexpr double kCfTolerance = 1e-14;
constexpr int kCfMaxIterations = 300;

// Continued fraction for I_x(a,b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny)
        d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kCfMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kCfTolerance)
            break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw DomainError("regularized_incomplete_beta: a and b must be positive");
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError("regularized_incomplete_beta: x must be in [0,1], got " +
                          std::to_string(x));
    if (x == 0.0)
        return 0.0;
    if (x == 1.0)
        return 1.0;
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    double result;
    if (x < (a + 1.0) / (a + b + 2.0))
        result = front * beta_continued_fraction(a, b, x) / a;
    else
        result = 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) *
                           beta_continued_fraction(b, a, 1.0 - x) / b;
    if (result < 0.0)
        return 0.0;
    if (result > 1.0)
        return 1.0;
    return result;
}

double student_t_two_sided_p(double t, double df) {
    if (!(df >= 1.0))
        throw DomainError("student_t_two_sided_p: df must be >= 1");
    if (std::isnan(t))
        throw DomainError("student_t_two_sided_p: t is NaN");
    if (std::isinf(t))
        return 0.0;
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

}  // namespace lml
