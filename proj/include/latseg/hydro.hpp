#pragma once

#include <functional>
#include <vector>

#include "latseg/field.hpp"

namespace latseg {

struct HydroParams {
    double d1 = 1.0, d2 = 1.0;
    double K = 1.0;
};

struct DtControl {
    double theta = 0.9;    // safety factor in the stability bound
    double max_dt = 1e300; // optional accuracy cap
    double min_dt = 1e-12; // below this the step control signals failure
};

struct HydroState {
    double t = 0.0;
    DensityField u1, u2;

    HydroState(const Torus& torus, double t0 = 0.0) : t(t0), u1(torus), u2(torus) {}
};

/// Right-hand side d_i N^2 Lap(u_i) - K u1 u2, evaluated pointwise.
void hydro_rhs(const HydroState& s, const HydroParams& p, std::vector<double>& du1,
               std::vector<double>& du2);

/// Time integrals accumulated alongside the explicit update, with the
/// scheme's own quadrature (per-step trapezoid).
struct HydroRunStats {
    double seg_integral = 0.0;      // int_0^T N^{-d} sum_x u1 u2 dt
    double grad_integral[2] = {0, 0}; // int_0^T N^{-d} sum_x |grad u_i|^2 dt
};

/// Forward-Euler update in conservative flux form with
/// dt <= theta / (2d max(d1,d2) N^2 + K); the step is a convex combination,
/// so [0,c] bounds and the exponential lower bound are preserved without
/// clipping. Returns states at the requested output times (sorted,
/// each <= T; T itself is always appended if missing).
std::vector<HydroState> hydro_integrate(const HydroState& s0, double T, const HydroParams& p,
                                        const DtControl& dtc,
                                        const std::vector<double>& output_times,
                                        HydroRunStats* stats = nullptr, bool parallel = true);

/// Single Euler step; exposed for the serial-vs-parallel kernel checks.
void hydro_step(HydroState& s, double dt, const HydroParams& p, bool parallel,
                std::vector<double>& flux_scratch, HydroRunStats* stats = nullptr);

/// Stable step size for the given problem.
double hydro_stable_dt(const Torus& torus, const HydroParams& p, const DtControl& dtc);

struct BoundCheck {
    bool ok = true;
    double worst = 0.0; // most negative margin seen
};

/// Order-preservation check: all values within [-tol, c + tol].
BoundCheck check_max_principle(const std::vector<HydroState>& traj, double c,
                               double tol = 1e-10);

/// u0 e^{-K t}.
double lower_bound(double t, double u0, double K);

/// Checks u_i(t,x) >= u0 e^{-K t} - tol along the trajectory.
BoundCheck check_lower_bound(const std::vector<HydroState>& traj, double u0, double K,
                             double tol = 1e-10);

/// inf over C making |grad u_i(t,x)| <= K (C0 + C sqrt(t)) hold on the
/// trajectory (t > 0 entries only).
double gradient_bound_constant(const std::vector<HydroState>& traj, double C0, double K);

} // namespace latseg
