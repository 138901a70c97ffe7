#pragma once

#include <array>
#include <vector>

#include "latseg/field.hpp"
#include "latseg/rng.hpp"

namespace latseg {

/// Block-averaging kernels. p_ell is uniform on a block of side ell,
/// q_ell = p_ell * p_ell is the triangular product kernel. Two index
/// conventions coexist:
///   - the closed forms follow the 1-based block {1..ell}^d, so q_ell is
///     supported on {2,...,2 ell}^d with q(x) = (x-1)/ell^2 rising and
///     (2 ell + 1 - x)/ell^2 falling per axis (d = 1);
///   - the zero-based variant q0(m) = q(m + 2) per axis, supported on
///     {0,...,2 ell - 2}^d, is what flows and telescoping use, since it
///     fits the flow box {0,...,2 ell - 1}^d.
struct AveragingKernel {
    int d = 1;
    int ell = 1;

    // per-axis 1d factors, exact rationals (integer counts / ell^k)
    double p1_axis(int x) const;  // uniform on {1..ell}
    double q1_axis(int x) const;  // support {2..2 ell}
    double q0_axis(int m) const;  // support {0..2 ell - 2}

    double p(const std::array<int, 3>& c) const;  // product over axes, 1-based
    double q(const std::array<int, 3>& c) const;  // product over axes, 1-based
    double q0(const std::array<int, 3>& c) const; // product over axes, 0-based

    double p_sum() const; // exact total mass (tests)
    double q_sum() const;
};

AveragingKernel build_kernels(int ell, int d);

/// Antisymmetric edge flow on a finite box with no-flux boundary,
/// satisfying div Phi = delta_0 - target. Stored either as explicit edge
/// values (d = 1 closed forms) or as a discrete potential with
/// Phi(x, x+e_j) = phi(x) - phi(x+e_j) (d >= 2, minimum-energy).
class LatticeFlow {
public:
    int d = 1;
    int ell = 1;
    std::array<int, 3> dims{1, 1, 1}; // box side per axis
    std::vector<double> target;       // divergence target measure on the box

    long box_size() const {
        long n = 1;
        for (int j = 0; j < d; ++j) n *= dims[j];
        return n;
    }
    long box_stride(int axis) const {
        long s = 1;
        for (int j = axis + 1; j < d; ++j) s *= dims[j];
        return s;
    }

    /// Directed edge value Phi(x, x + e_j); zero when the edge leaves the box.
    double edge_value(long x, int axis) const;

    /// Sum over box neighbors z of Phi(x, z).
    double divergence(long x) const;

    /// max_x |divergence(x) - (delta_0(x) - target(x))|
    double divergence_defect() const;

    /// Sum of squared edge values over the box.
    double energy() const;

    bool potential_backed = false;
    std::vector<double> phi;                  // potential (d >= 2)
    std::array<std::vector<double>, 3> edges; // explicit (d = 1), edges[j][x]
};

/// Flow connecting delta_0 to the zero-based q kernel on the box
/// {0,...,2 ell - 1}^d. d = 1 is the exact cumulative construction; d >= 2
/// solves the discrete Poisson equation (gradient flow, minimum energy).
LatticeFlow build_flow(int ell, int d);

/// d = 1 flow connecting delta_0 to p_ell on {0,...,ell} in the 1-based
/// convention; the affine closed form Phi(x, x+1) = (ell - x)/ell.
LatticeFlow build_flow_p_1d(int ell);

/// d = 1 q-flow built by averaging translates of the p-flow; equals
/// build_flow(ell, 1) up to rounding (cross-check construction).
LatticeFlow build_flow_q_1d_composed(int ell);

/// Energy growth reference: g_1 = ell, g_2 = log ell, g_3 = 1.
double flow_energy_scale(int d, int ell);

/// Arithmetic mean of g over the block {0..ell-1}^d translated to x,
/// looking left (x - y) or right (x + y), with wraparound.
double local_average(const std::vector<double>& g, const Torus& torus, long x, int ell,
                     bool left);

/// Normalized fluctuation fields for a pair configuration against strictly
/// interior densities: w_i = (sigma_i - u_i)/chi(u_i), chi(u) = u(1-u),
/// wt1 = (u1 + u2 - 1) u1 u2 w1. Rejects any u at 0 or 1.
struct OmegaFields {
    std::vector<double> w1, w2, wt1;
};
OmegaFields omega_fields(const PairConfig& cfg, const DensityField& u1, const DensityField& u2);

/// Weighted window sum pairing wt1 against the flow edges along an axis:
/// h(x, j) = - sum_m wt1(x - m) Phi(m, m + e_j). It does not depend on
/// sigma_1 at x + e_j.
double h_field(const std::vector<double>& wt1, const Torus& torus, const LatticeFlow& flow,
               long x, int axis);
double h_field(const PairConfig& cfg, const DensityField& u1, const DensityField& u2,
               const LatticeFlow& flow, long x, int axis);

/// Exact telescoping identity between the on-site pairing V and its
/// block-averaged version V^ell:
///   lhs = V - V^ell,  rhs = K sum_j sum_x h(x,j) (w2(x+e_j) - w2(x)).
struct TelescopingResult {
    double lhs = 0.0, rhs = 0.0, defect = 0.0;
    double V = 0.0, Vell = 0.0;
};
TelescopingResult telescoping_check(const PairConfig& cfg, const DensityField& u1,
                                    const DensityField& u2, double K, int ell);

/// Bounded independent two-point variable: value b with probability p,
/// else a.
struct TwoPointVar {
    double a, b, p;
};

struct ConcentrationResult {
    double lhs = 0.0; // log E exp(gamma (sum centered)^2)
    double rhs = 0.0; // 2 gamma kappa
    double kappa = 0.0;
    bool ok = false;
};

/// Exact enumeration over the 2^n outcomes; gamma must lie in [0, 1/kappa]
/// with kappa = sum (b_i - a_i)^2.
ConcentrationResult concentration_exact(const std::vector<TwoPointVar>& vars, double gamma);

/// Monte Carlo variant for larger n; lhs is a 99% upper confidence bound.
ConcentrationResult concentration_mc(const std::vector<TwoPointVar>& vars, double gamma,
                                     long samples, Xoshiro256pp& rng);

} // namespace latseg
