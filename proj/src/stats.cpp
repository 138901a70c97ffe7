#include "latseg/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace latseg {

double kahan_total(const std::vector<double>& v) {
    KahanSum s;
    for (double x : v) s.add(x);
    return s.value();
}

double log_binom_coeff(long n, long k) {
    if (k < 0 || k > n) return -1e300;
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binom_tail_geq(long n, double p, long k) {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    double acc = 0.0;
    for (long j = n; j >= k; --j) {
        double lg = log_binom_coeff(n, j) + j * std::log(p) + (n - j) * std::log1p(-p);
        acc += std::exp(lg);
    }
    return acc > 1.0 ? 1.0 : acc;
}

double binom_tail_leq(long n, double p, long k) {
    if (k >= n) return 1.0;
    if (k < 0) return 0.0;
    if (p <= 0.0) return 1.0;
    if (p >= 1.0) return 0.0;
    double acc = 0.0;
    for (long j = 0; j <= k; ++j) {
        double lg = log_binom_coeff(n, j) + j * std::log(p) + (n - j) * std::log1p(-p);
        acc += std::exp(lg);
    }
    return acc > 1.0 ? 1.0 : acc;
}

double binom_two_sided_exceedance(long n, double p, double eps) {
    // |k/n - p| > eps  <=>  k > n(p+eps) or k < n(p-eps)
    long hi = static_cast<long>(std::floor(n * (p + eps)));   // largest k NOT exceeding
    long lo = static_cast<long>(std::ceil(n * (p - eps)));    // smallest k NOT exceeding
    return binom_tail_geq(n, p, hi + 1) + binom_tail_leq(n, p, lo - 1);
}

ConfidenceInterval clopper_pearson(long successes, long trials, double alpha) {
    if (trials <= 0) throw std::invalid_argument("clopper_pearson: no trials");
    ConfidenceInterval ci;
    const double half = alpha / 2.0;
    // lower bound: largest p with P(Bin >= successes) <= half
    if (successes == 0) {
        ci.lo = 0.0;
    } else {
        double a = 0.0, b = static_cast<double>(successes) / trials;
        for (int it = 0; it < 200; ++it) {
            double m = 0.5 * (a + b);
            if (binom_tail_geq(trials, m, successes) < half)
                a = m;
            else
                b = m;
        }
        ci.lo = a;
    }
    // upper bound: smallest p with P(Bin <= successes) <= half
    if (successes == trials) {
        ci.hi = 1.0;
    } else {
        double a = static_cast<double>(successes) / trials, b = 1.0;
        for (int it = 0; it < 200; ++it) {
            double m = 0.5 * (a + b);
            if (binom_tail_leq(trials, m, successes) > half)
                a = m;
            else
                b = m;
        }
        ci.hi = b;
    }
    return ci;
}

} // namespace latseg
