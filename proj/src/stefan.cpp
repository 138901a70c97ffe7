#include "latseg/stefan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace latseg {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double stefan_stable_dt(const Torus& grid, const StefanParams& p, const DtControl& dtc) {
    const double M2 = static_cast<double>(grid.side()) * grid.side();
    double dt = dtc.theta / (2.0 * grid.dim() * std::max(p.d1, p.d2) * M2);
    return std::min(dt, dtc.max_dt);
}

void stefan_step(StefanState& s, double dt, const StefanParams& p, bool parallel,
                 std::vector<double>& scratch) {
    const Torus& g = s.w.grid;
    const int d = g.dim();
    const long n = g.nsites();
    const double coef = dt * static_cast<double>(g.side()) * g.side();
    scratch.resize(n * d + n);
    double* G = scratch.data();
    double* Dw = scratch.data() + n * d;

#pragma omp parallel for if (parallel) schedule(static)
    for (long x = 0; x < n; ++x) Dw[x] = flux_D(s.w[x], p.d1, p.d2);
#pragma omp parallel for if (parallel) schedule(static)
    for (long x = 0; x < n; ++x)
        for (int j = 0; j < d; ++j) G[x * d + j] = coef * (Dw[g.shift(x, j, +1)] - Dw[x]);
#pragma omp parallel for if (parallel) schedule(static)
    for (long x = 0; x < n; ++x) {
        double acc = s.w[x];
        for (int j = 0; j < d; ++j) acc += G[x * d + j] - G[g.shift(x, j, -1) * d + j];
        s.w[x] = acc;
    }
    s.t += dt;
}

std::vector<StefanState> stefan_integrate(const StefanState& s0, double T,
                                          const StefanParams& p, const DtControl& dtc,
                                          const std::vector<double>& output_times,
                                          bool parallel) {
    if (T < s0.t) throw std::invalid_argument("stefan_integrate: T before initial time");
    const double dt_cap = stefan_stable_dt(s0.w.grid, p, dtc);
    if (dt_cap < dtc.min_dt)
        throw std::runtime_error("stefan_integrate: stability bound forces dt below the floor");

    std::vector<double> outs = output_times;
    std::sort(outs.begin(), outs.end());
    if (outs.empty() || outs.back() < T) outs.push_back(T);

    std::vector<StefanState> traj;
    StefanState s = s0;
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
            stefan_step(s, dt, p, parallel, scratch);
        }
        s.t = target;
        traj.push_back(s);
        ++next_out;
    }
    return traj;
}

SignedField stefan_spectral_heat(const SignedField& w0, double T, double D) {
    const Torus& g = w0.grid;
    const int M = g.side();
    const long n = g.nsites();
    // mode coefficients of the discrete Laplacian eigenbasis, one axis at a
    // time (plain O(M^2) transform per axis line; grids here are small)
    std::vector<double> re(w0.w.begin(), w0.w.end()), im(n, 0.0);
    std::vector<double> re2(n), im2(n);
    for (int axis = 0; axis < g.dim(); ++axis) {
        const long stride = g.stride(axis);
        for (long base = 0; base < n; ++base) {
            if ((base / stride) % M != 0) continue; // only line heads
            for (int k = 0; k < M; ++k) {
                double ar = 0.0, ai = 0.0;
                for (int i = 0; i < M; ++i) {
                    double ang = -2.0 * kPi * k * i / M;
                    double c = std::cos(ang), sn = std::sin(ang);
                    double vr = re[base + i * stride], vi = im[base + i * stride];
                    ar += vr * c - vi * sn;
                    ai += vr * sn + vi * c;
                }
                re2[base + k * stride] = ar;
                im2[base + k * stride] = ai;
            }
        }
        std::swap(re, re2);
        std::swap(im, im2);
    }
    // decay each mode with its discrete eigenvalue
    const double M2 = static_cast<double>(M) * M;
    for (long s = 0; s < n; ++s) {
        double lam = 0.0;
        for (int axis = 0; axis < g.dim(); ++axis) {
            int k = g.coord(s, axis);
            lam += 2.0 * (1.0 - std::cos(2.0 * kPi * k / M));
        }
        double f = std::exp(-D * M2 * lam * T);
        re[s] *= f;
        im[s] *= f;
    }
    // inverse transform
    for (int axis = 0; axis < g.dim(); ++axis) {
        const long stride = g.stride(axis);
        for (long base = 0; base < n; ++base) {
            if ((base / stride) % M != 0) continue;
            for (int i = 0; i < M; ++i) {
                double ar = 0.0, ai = 0.0;
                for (int k = 0; k < M; ++k) {
                    double ang = 2.0 * kPi * k * i / M;
                    double c = std::cos(ang), sn = std::sin(ang);
                    double vr = re[base + k * stride], vi = im[base + k * stride];
                    ar += vr * c - vi * sn;
                    ai += vr * sn + vi * c;
                }
                re2[base + i * stride] = ar / M;
                im2[base + i * stride] = ai / M;
            }
        }
        std::swap(re, re2);
        std::swap(im, im2);
    }
    SignedField out(g);
    for (long s = 0; s < n; ++s) out[s] = re[s];
    return out;
}

WeakTestFn weak_test_fn(int id, double T, int d) {
    // spatial modes: 1, cos(2 pi r1), sin(2 pi r1), cos(4 pi r1),
    // cos(2 pi r1)cos(2 pi r2) when d >= 2
    const int nmodes = weak_test_fn_count();
    if (id < 0 || id >= nmodes) throw std::invalid_argument("weak_test_fn: bad id");
    auto damp = [T](double t) { return 1.0 - t / T; };
    auto ddamp = [T](double) { return -1.0 / T; };

    auto space = [id, d](const double* r) -> double {
        switch (id) {
            case 0: return 1.0;
            case 1: return std::cos(2.0 * kPi * r[0]);
            case 2: return std::sin(2.0 * kPi * r[0]);
            case 3: return std::cos(4.0 * kPi * r[0]);
            default:
                return d >= 2 ? std::cos(2.0 * kPi * r[0]) * std::cos(2.0 * kPi * r[1])
                              : std::cos(6.0 * kPi * r[0]);
        }
    };
    auto lap_space = [id, d, space](const double* r) -> double {
        switch (id) {
            case 0: return 0.0;
            case 1:
            case 2: return -4.0 * kPi * kPi * space(r);
            case 3: return -16.0 * kPi * kPi * space(r);
            default:
                return d >= 2 ? -8.0 * kPi * kPi * space(r) : -36.0 * kPi * kPi * space(r);
        }
    };

    WeakTestFn f;
    f.name = "psi" + std::to_string(id);
    f.psi = [damp, space](double t, const double* r, int) { return damp(t) * space(r); };
    f.dpsi_dt = [ddamp, space](double t, const double* r, int) { return ddamp(t) * space(r); };
    f.lap_psi = [damp, lap_space](double t, const double* r, int) { return damp(t) * lap_space(r); };
    return f;
}

int weak_test_fn_count() { return 5; }

double weak_residual(const std::vector<StefanState>& traj, const StefanParams& p,
                     const WeakTestFn& psi) {
    if (traj.size() < 2) throw std::invalid_argument("weak_residual: need a trajectory");
    const Torus& g = traj.front().w.grid;
    const long n = g.nsites();
    const double invV = 1.0 / static_cast<double>(n);
    double r[3];

    auto space_integral = [&](const StefanState& s, double t, bool at0) {
        double acc = 0.0;
        for (long x = 0; x < n; ++x) {
            auto c = g.coords(x);
            for (int j = 0; j < g.dim(); ++j) r[j] = static_cast<double>(c[j]) / g.side();
            if (at0) {
                acc += s.w[x] * psi.psi(0.0, r, g.dim());
            } else {
                acc += s.w[x] * psi.dpsi_dt(t, r, g.dim()) +
                       flux_D(s.w[x], p.d1, p.d2) * psi.lap_psi(t, r, g.dim());
            }
        }
        return acc * invV;
    };

    // trapezoid in t over the stored states
    double time_integral = 0.0;
    double prev = space_integral(traj[0], traj[0].t, false);
    for (std::size_t i = 1; i < traj.size(); ++i) {
        double cur = space_integral(traj[i], traj[i].t, false);
        time_integral += 0.5 * (prev + cur) * (traj[i].t - traj[i - 1].t);
        prev = cur;
    }
    double initial_term = space_integral(traj.front(), 0.0, true);
    return std::abs(time_integral + initial_term);
}

std::vector<Crossing> interface_extract_1d(const SignedField& w) {
    const Torus& g = w.grid;
    if (g.dim() != 1) throw std::invalid_argument("interface_extract_1d: d must be 1");
    const int M = g.side();
    // crossings between consecutive nonzero cells; runs of exact zeros
    // count as part of the interface they separate
    std::vector<int> nz;
    for (int i = 0; i < M; ++i)
        if (w[i] != 0.0) nz.push_back(i);
    std::vector<Crossing> out;
    if (nz.size() < 2) return out;
    for (std::size_t k = 0; k < nz.size(); ++k) {
        int i = nz[k];
        int j = nz[(k + 1) % nz.size()];
        double a = w[i], b = w[j];
        if ((a > 0.0) == (b > 0.0)) continue;
        int gap = (j - i + M) % M;
        double theta = a / (a - b); // in (0,1), linear through the zero run
        Crossing c;
        c.pos = std::fmod((i + theta * gap) / M, 1.0);
        int im = (i - 1 + M) % M;
        int jp = (j + 1) % M;
        double slope_left = M * (w[i] - w[im]);  // one-sided, left of the interval
        double slope_right = M * (w[jp] - w[j]); // one-sided, right of the interval
        if (a > 0.0) {
            c.s_plus = slope_left;
            c.s_minus = slope_right;
        } else {
            c.s_plus = slope_right;
            c.s_minus = slope_left;
        }
        out.push_back(c);
    }
    return out;
}

} // namespace latseg
