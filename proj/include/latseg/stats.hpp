#pragma once

#include <vector>

namespace latseg {

/// Compensated accumulator for deterministic conserved-quantity sums.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

double kahan_total(const std::vector<double>& v);

/// log C(n,k)
double log_binom_coeff(long n, long k);

/// P(Bin(n,p) >= k), exact summation in log space.
double binom_tail_geq(long n, double p, long k);

/// P(Bin(n,p) <= k)
double binom_tail_leq(long n, double p, long k);

/// Two-sided exact exceedance P(|Bin(n,p)/n - p| > eps).
double binom_two_sided_exceedance(long n, double p, double eps);

struct ConfidenceInterval {
    double lo = 0.0, hi = 1.0;
};

/// Exact (Clopper-Pearson) interval for a binomial proportion.
ConfidenceInterval clopper_pearson(long successes, long trials, double alpha = 0.05);

} // namespace latseg
