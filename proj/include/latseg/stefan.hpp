#pragma once

#include <functional>
#include <vector>

#include "latseg/field.hpp"
#include "latseg/hydro.hpp" // DtControl

namespace latseg {

/// Piecewise-linear monotone flux: d1 s for s >= 0, d2 s for s < 0.
inline double flux_D(double s, double d1, double d2) { return s >= 0.0 ? d1 * s : d2 * s; }

struct StefanParams {
    double d1 = 1.0, d2 = 1.0;
};

/// Signed density difference on a uniform macroscopic grid; cells are
/// centered at x/M with half-open boxes of side 1/M.
struct SignedField {
    Torus grid;
    std::vector<double> w;

    explicit SignedField(const Torus& g, double fill = 0.0) : grid(g), w(g.nsites(), fill) {}
    double& operator[](long s) { return w[s]; }
    double operator[](long s) const { return w[s]; }
    long size() const { return grid.nsites(); }
};

struct StefanState {
    double t = 0.0;
    SignedField w;
    StefanState(const Torus& g, double t0 = 0.0) : t(t0), w(g) {}
};

/// Conservative explicit update w += dt M^2 div(grad D(w)) with
/// dt <= theta / (2d max(d1,d2) M^2). The cell sum of w is conserved to
/// rounding. Returns states at the requested output times plus T.
std::vector<StefanState> stefan_integrate(const StefanState& s0, double T,
                                          const StefanParams& p, const DtControl& dtc,
                                          const std::vector<double>& output_times,
                                          bool parallel = true);

void stefan_step(StefanState& s, double dt, const StefanParams& p, bool parallel,
                 std::vector<double>& scratch);

double stefan_stable_dt(const Torus& grid, const StefanParams& p, const DtControl& dtc);

/// Exact-in-time evolution of the semi-discrete linear heat equation
/// (d1 = d2 = D), computed in the discrete Fourier basis. Oracle for the
/// integrator when the flux is linear.
SignedField stefan_spectral_heat(const SignedField& w0, double T, double D);

/// Test functions psi(t,r) = (1 - t/T) * (spatial mode), with analytic
/// time derivative and Laplacian; psi(T, .) = 0 by construction.
struct WeakTestFn {
    std::string name;
    std::function<double(double t, const double* r, int d)> psi;
    std::function<double(double t, const double* r, int d)> dpsi_dt;
    std::function<double(double t, const double* r, int d)> lap_psi;
};

/// Built-in family indexed 0..count-1.
WeakTestFn weak_test_fn(int id, double T, int d);
int weak_test_fn_count();

/// | int_0^T int (w dpsi/dt + D(w) lap psi) dr dt + int w0 psi(0,.) dr |
/// with trapezoid quadrature in t over the stored states and midpoint in r.
double weak_residual(const std::vector<StefanState>& traj, const StefanParams& p,
                     const WeakTestFn& psi);

struct Crossing {
    double pos;     // zero of the linear interpolant, in [0,1)
    double s_plus;  // one-sided slope of w on the w > 0 side
    double s_minus; // one-sided slope of w on the w < 0 side
};

/// Linear-interpolated zero crossings of a d = 1 field; empty if w has
/// constant sign. One-sided slopes use one-cell differences that do not
/// straddle the crossing interval.
std::vector<Crossing> interface_extract_1d(const SignedField& w);

} // namespace latseg
