#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <vector>

namespace hby {

inline constexpr double kPi = 3.14159265358979323846;

/// Standard normal CDF. erfc keeps full relative precision in the lower tail,
/// which matters because per-pad failure probabilities sit 10+ sigma out.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// log(Phi(x)) usable far into the lower tail without underflow to -inf
/// until erfc itself underflows (~ -38 sigma), which is beyond anything the
/// yield formulas visit.
inline double normal_logcdf(double x) {
    double p = normal_cdf(x);
    if (p > 0.0) return std::log(p);
    // asymptotic expansion of log(Phi(x)) for x << 0
    return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * kPi);
}

inline double sq(double x) { return x * x; }

/// Scalar bisection on a monotone-decreasing function; returns x with
/// f(x) ~= target to within xtol on [lo, hi].
inline double bisect_decreasing(const std::function<double(double)>& f, double target,
                                double lo, double hi, double xtol) {
    for (int i = 0; i < 200 && (hi - lo) > xtol; ++i) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Trapezoid rule over an arbitrary sorted abscissa grid.
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return acc;
}

/// Regularized upper incomplete gamma Q(a, x): series below a+1, Lentz
/// continued fraction above.
inline double gamma_q(double a, double x) {
    if (x <= 0.0) return 1.0;
    const double prefix = std::exp(-x + a * std::log(x) - std::lgamma(a));
    if (x < a + 1.0) {
        double ap = a, term = 1.0 / a, sum = term;
        for (int n = 0; n < 1000; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
        }
        return 1.0 - sum * prefix;
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 1000; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return prefix * h;
}

/// Survival function of the chi-square distribution with k degrees of
/// freedom, i.e. the p-value of a chi-square statistic.
inline double chi2_sf(double x, double k) { return gamma_q(0.5 * k, 0.5 * x); }

/// 64-bit FNV-1a, the fingerprint primitive used for LUT cache keys.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h) {
    return fnv1a(&v, sizeof(v), h);
}

inline std::uint64_t fnv1a_f64(double v, std::uint64_t h) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    return fnv1a_u64(bits, h);
}

} // namespace hby
