#include "latseg/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "latseg/stats.hpp"

namespace latseg {

void hydro_rhs(const HydroState& s, const HydroParams& p, std::vector<double>& du1,
               std::vector<double>& du2) {
    const Torus& t = s.u1.torus;
    const double N2 = static_cast<double>(t.side()) * t.side();
    du1.assign(t.nsites(), 0.0);
    du2.assign(t.nsites(), 0.0);
    for (long x = 0; x < t.nsites(); ++x) {
        double react = p.K * s.u1[x] * s.u2[x];
        du1[x] = p.d1 * N2 * discrete_laplacian(s.u1, x) - react;
        du2[x] = p.d2 * N2 * discrete_laplacian(s.u2, x) - react;
    }
}

double hydro_stable_dt(const Torus& torus, const HydroParams& p, const DtControl& dtc) {
    const double N2 = static_cast<double>(torus.side()) * torus.side();
    const double dmax = std::max(p.d1, p.d2);
    double dt = dtc.theta / (2.0 * torus.dim() * dmax * N2 + p.K);
    return std::min(dt, dtc.max_dt);
}

namespace {

// One species diffusion pass in flux form: G_j(x) = coef (u(x+e_j) - u(x)),
// then u += div G. Flux form keeps the site sum drift at rounding level.
// The per-site arithmetic is identical in the serial and parallel paths,
// so results agree bitwise.
void diffuse(DensityField& u, double coef, double* G, bool parallel) {
    const Torus& t = u.torus;
    const int d = t.dim();
    const long n = t.nsites();
#pragma omp parallel for if (parallel) schedule(static)
    for (long x = 0; x < n; ++x)
        for (int j = 0; j < d; ++j) G[x * d + j] = coef * (u[t.shift(x, j, +1)] - u[x]);
#pragma omp parallel for if (parallel) schedule(static)
    for (long x = 0; x < n; ++x) {
        double acc = u[x];
        for (int j = 0; j < d; ++j) acc += G[x * d + j] - G[t.shift(x, j, -1) * d + j];
        u[x] = acc;
    }
}

} // namespace

void hydro_step(HydroState& s, double dt, const HydroParams& p, bool parallel,
                std::vector<double>& scratch, HydroRunStats* stats) {
    const Torus& t = s.u1.torus;
    const int d = t.dim();
    const long n = t.nsites();
    const double N2 = static_cast<double>(t.side()) * t.side();
    scratch.resize(n * d + n);
    double* G = scratch.data();
    double* react = scratch.data() + n * d;

    if (stats) {
        // left-endpoint rule: the quadrature matching the update itself,
        // so the mass bookkeeping identities hold to rounding
        const double invV = 1.0 / static_cast<double>(n);
        KahanSum seg;
        for (long x = 0; x < n; ++x) seg.add(s.u1[x] * s.u2[x]);
        stats->seg_integral += dt * invV * seg.value();
        for (int i = 0; i < 2; ++i) {
            const DensityField& u = i == 0 ? s.u1 : s.u2;
            KahanSum e;
            for (long x = 0; x < n; ++x)
                for (int j = 0; j < d; ++j) {
                    double diff = u[t.shift(x, j, +1)] - u[x];
                    e.add(diff * diff);
                }
            stats->grad_integral[i] += dt * invV * N2 * e.value();
        }
    }

    // reaction column first (reads both fields); the same rounded value is
    // subtracted from u1 and u2, so the species difference is untouched
#pragma omp parallel for if (parallel) schedule(static)
    for (long x = 0; x < n; ++x) react[x] = dt * p.K * (s.u1[x] * s.u2[x]);

    diffuse(s.u1, dt * p.d1 * N2, G, parallel);
    diffuse(s.u2, dt * p.d2 * N2, G, parallel);

#pragma omp parallel for if (parallel) schedule(static)
    for (long x = 0; x < n; ++x) {
        s.u1[x] -= react[x];
        s.u2[x] -= react[x];
    }
    s.t += dt;
}

std::vector<HydroState> hydro_integrate(const HydroState& s0, double T, const HydroParams& p,
                                        const DtControl& dtc,
                                        const std::vector<double>& output_times,
                                        HydroRunStats* stats, bool parallel) {
    if (T < s0.t) throw std::invalid_argument("hydro_integrate: T before initial time");
    const double dt_cap = hydro_stable_dt(s0.u1.torus, p, dtc);
    if (dt_cap < dtc.min_dt)
        throw std::runtime_error("hydro_integrate: stability bound forces dt below the floor");

    std::vector<double> outs = output_times;
    std::sort(outs.begin(), outs.end());
    if (outs.empty() || outs.back() < T) outs.push_back(T);

    std::vector<HydroState> traj;
    HydroState s = s0;
    std::vector<double> scratch;
    std::size_t next_out = 0;
    while (next_out < outs.size() && outs[next_out] <= s.t + 1e-15) {
        traj.push_back(s);
        ++next_out;
    }
    while (next_out < outs.size()) {
        double target = outs[next_out];
        while (s.t < target - 1e-15) {
            double dt = std::min(dt_cap, target - s.t);
            hydro_step(s, dt, p, parallel, scratch, stats);
        }
        s.t = target;
        traj.push_back(s);
        ++next_out;
    }
    return traj;
}

BoundCheck check_max_principle(const std::vector<HydroState>& traj, double c, double tol) {
    BoundCheck r;
    double margin = 1e300;
    for (const auto& s : traj)
        for (int i = 0; i < 2; ++i) {
            const auto& u = i == 0 ? s.u1 : s.u2;
            for (long x = 0; x < u.size(); ++x) {
                margin = std::min(margin, u[x] + tol);
                margin = std::min(margin, c + tol - u[x]);
            }
        }
    r.worst = margin;
    r.ok = margin >= 0.0;
    return r;
}

double lower_bound(double t, double u0, double K) { return u0 * std::exp(-K * t); }

BoundCheck check_lower_bound(const std::vector<HydroState>& traj, double u0, double K,
                             double tol) {
    BoundCheck r;
    double margin = 1e300;
    for (const auto& s : traj) {
        double lb = lower_bound(s.t, u0, K) - tol;
        for (int i = 0; i < 2; ++i) {
            const auto& u = i == 0 ? s.u1 : s.u2;
            for (long x = 0; x < u.size(); ++x) margin = std::min(margin, u[x] - lb);
        }
    }
    r.worst = margin;
    r.ok = margin >= 0.0;
    return r;
}

double gradient_bound_constant(const std::vector<HydroState>& traj, double C0, double K) {
    double c = 0.0;
    double g[3];
    for (const auto& s : traj) {
        if (s.t <= 0.0) continue;
        const double sq = std::sqrt(s.t);
        for (int i = 0; i < 2; ++i) {
            const auto& u = i == 0 ? s.u1 : s.u2;
            for (long x = 0; x < u.size(); ++x) {
                discrete_gradient(u, x, g);
                for (int j = 0; j < u.torus.dim(); ++j) {
                    double need = (std::abs(g[j]) / K - C0) / sq;
                    if (need > c) c = need;
                }
            }
        }
    }
    return c;
}

} // namespace latseg
