#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "latseg/field.hpp"
#include "latseg/kawasaki.hpp" // TestFn
#include "latseg/stats.hpp"

namespace latseg {

struct MasterParams {
    int N = 4;
    double d1 = 1.0, d2 = 1.0, K = 1.0;
};

/// Full state space of two binary fields on the d = 1 torus of side N.
/// State index interleaves bits: bit 2x is sigma1_x, bit 2x+1 is sigma2_x.
class StateSpace {
public:
    explicit StateSpace(int N);

    int sites() const { return N_; }
    long nstates() const { return nstates_; }

    static int s1(long state, int x) { return static_cast<int>((state >> (2 * x)) & 1); }
    static int s2(long state, int x) { return static_cast<int>((state >> (2 * x + 1)) & 1); }
    static long swap1(long state, int x, int y); // exchange sigma1 values at x and y
    static long swap2(long state, int x, int y);
    static long kill_at(long state, int x); // clear both species at x

    PairConfig to_config(long state) const;
    long from_config(const PairConfig& cfg) const;

private:
    int N_;
    long nstates_;
};

/// Sparse generator on the full state space: exchange of species i across a
/// directed bond (x, x+1) at rate N^2 d_i when the occupations differ, and
/// pair annihilation at rate K on doubly occupied sites. Rows are
/// from-states; the transpose drives the forward equation.
struct Generator {
    StateSpace space;
    MasterParams params;
    std::vector<long> row_ptr, col;
    std::vector<double> rate;
    std::vector<double> diag; // negative total out-rate
    std::vector<long> trow_ptr, tcol;
    std::vector<double> trate;

    /// dmu(s') = sum_s mu(s) rate(s -> s') + diag(s') mu(s')
    void apply_forward(const double* mu, double* dmu, bool parallel = true) const;

    double max_abs_row_sum() const; // exactly zero rows up to rounding
    double out_rate(long s) const { return -diag[s]; }
};

Generator build_generator(const MasterParams& p);

/// Product Bernoulli weights nu(s) = prod_x u1^s1 (1-u1)^(1-s1) * (same for 2).
/// All means must lie strictly in (0,1) so the measure has full support.
std::vector<double> product_weights(const StateSpace& sp, const DensityField& u1,
                                    const DensityField& u2);

/// sum_s mu(s) log(mu(s)/nu(s)) with 0 log 0 = 0. Throws if nu vanishes.
double relative_entropy(const std::vector<double>& mu, const std::vector<double>& nu);

/// (1/4) sum over ordered adjacent pairs of
///   int [ d1 (f(sigma1-swap) - f)^2 + d2 (f(sigma2-swap) - f)^2 ] dnu.
double dirichlet_form(const std::vector<double>& f, const std::vector<double>& nu,
                      const StateSpace& sp, double d1, double d2);

/// The piece of the form living on the single bond {x, y}.
double dirichlet_form_bond(const std::vector<double>& f, const std::vector<double>& nu,
                           const StateSpace& sp, int x, int y, double d1, double d2);

/// Forward equation mu' = L* mu integrated with an adaptive embedded
/// Runge-Kutta pair to the given tolerance.
std::vector<double> evolve_master(const Generator& g, std::vector<double> mu0, double T,
                                  double tol = 1e-10);

/// Adaptive integration of the N-site density system
/// du_i = d_i N^2 Lap(u_i) - K u1 u2 (the oracle-side reference path).
void evolve_densities(DensityField& u1, DensityField& u2, const MasterParams& p, double t0,
                      double t1, double tol = 1e-12);

/// Per-state evaluation of L^{*,nu} 1.
std::vector<double> adjoint_one(const Generator& g, const std::vector<double>& nu);

/// Per-state value of d/dt log psi_t = sum_x [du1 w1 + du2 w2], with du_i
/// taken from the density system right-hand side.
std::vector<double> dt_log_psi(const StateSpace& sp, const DensityField& u1,
                               const DensityField& u2, const MasterParams& p);

/// Per-state V1 + V2 + V.
std::vector<double> v_decomposition(const StateSpace& sp, const DensityField& u1,
                                    const DensityField& u2, const MasterParams& p);

/// max over states of | (L^{*,nu} 1 - dt log psi) - (V1 + V2 + V) |.
double verify_V_decomposition(const DensityField& u1, const DensityField& u2,
                              const MasterParams& p);

struct EntropyIneqPoint {
    double t;
    double dHdt;       // centered difference
    double dissipation; // 2 N^2 D(sqrt(dmu/dnu); nu)
    double production;  // int (L*1 - dt log psi) dmu
    double margin;      // rhs - dHdt, nonnegative up to discretization
};

/// Samples the entropy-derivative inequality along the coupled evolution
/// started from mu_0 = nu_0.
std::vector<EntropyIneqPoint> verify_entropy_inequality(const DensityField& u10,
                                                        const DensityField& u20,
                                                        const MasterParams& p,
                                                        const std::vector<double>& times,
                                                        double h_t = 1e-4,
                                                        double evolve_tol = 1e-11);

struct IbpResult {
    double lhs = 0.0;       // int h (s2_y - s2_x) f dnu
    double main_term = 0.0; // int h(swap) s2_x (f(swap) - f) dnu
    double r1 = 0.0;        // remainder, evaluated from its own two terms
    double identity_defect = 0.0; // |lhs - main - r1|
    double bound = 0.0;     // ||h - h(swap)||_inf + C e^{2 c1 K} |grad u2| int |h| f dnu
    bool within_bound = false;
};

/// Integration-by-parts identity across the bond (x, y), checked by exact
/// enumeration. c1, c2 certify e^{-c1 K} <= u2 <= c2 at x and y; the bound
/// constant is C = (1 + c2)/(1 - c2)^2.
IbpResult verify_ibp(const StateSpace& sp, const std::vector<double>& h,
                     const std::vector<double>& f, int x, int y, const DensityField& u1,
                     const DensityField& u2, double c1, double c2, double K);

struct LdpEstimate {
    long N = 0;
    long hits = 0, replicas = 0;
    double p_hat = 0.0;
    ConfidenceInterval ci;
    double rate = 0.0;    // -log(p_hat)/N (upper CI when no hits)
    double exact = -1.0;  // exact binomial exceedance when available, else -1
};

/// Monte Carlo exceedance of |<alpha_1, phi> - <u_1, phi>| > eps under the
/// product measure, with the exact binomial cross-check for phi == 1 and
/// constant u.
LdpEstimate ldp_estimate(const DensityField& u1, const TestFn& phi, double eps, long replicas,
                         std::uint64_t seed, bool phi_is_one_and_const);

} // namespace latseg
