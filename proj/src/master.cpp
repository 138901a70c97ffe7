#include "latseg/master.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "latseg/hydro.hpp"
#include "latseg/rng.hpp"

namespace latseg {

// ---------------------------------------------------------------------------
// state space

StateSpace::StateSpace(int N) : N_(N) {
    if (N < 1 || N > 10) throw std::invalid_argument("StateSpace: need 1 <= N <= 10");
    nstates_ = 1L << (2 * N);
}

long StateSpace::swap1(long state, int x, int y) {
    int bx = s1(state, x), by = s1(state, y);
    if (bx == by) return state;
    return state ^ (1L << (2 * x)) ^ (1L << (2 * y));
}

long StateSpace::swap2(long state, int x, int y) {
    int bx = s2(state, x), by = s2(state, y);
    if (bx == by) return state;
    return state ^ (1L << (2 * x + 1)) ^ (1L << (2 * y + 1));
}

long StateSpace::kill_at(long state, int x) { return state & ~(3L << (2 * x)); }

PairConfig StateSpace::to_config(long state) const {
    PairConfig cfg{Torus(1, N_)};
    for (int x = 0; x < N_; ++x) {
        cfg.sigma1[x] = static_cast<std::uint8_t>(s1(state, x));
        cfg.sigma2[x] = static_cast<std::uint8_t>(s2(state, x));
    }
    return cfg;
}

long StateSpace::from_config(const PairConfig& cfg) const {
    long s = 0;
    for (int x = 0; x < N_; ++x) {
        if (cfg.sigma1[x]) s |= 1L << (2 * x);
        if (cfg.sigma2[x]) s |= 1L << (2 * x + 1);
    }
    return s;
}

// ---------------------------------------------------------------------------
// generator

Generator build_generator(const MasterParams& p) {
    StateSpace sp(p.N);
    const int N = p.N;
    const long n = sp.nstates();
    const double N2 = static_cast<double>(N) * N;
    const double r1 = N2 * p.d1, r2 = N2 * p.d2;

    Generator g{sp, p, {}, {}, {}, {}, {}, {}, {}};
    g.row_ptr.assign(n + 1, 0);
    g.diag.assign(n, 0.0);

    std::vector<std::pair<long, double>> row;
    for (long s = 0; s < n; ++s) {
        row.clear();
        for (int x = 0; x < N; ++x) {
            int y = (x + 1) % N;
            if (StateSpace::s1(s, x) != StateSpace::s1(s, y))
                row.emplace_back(StateSpace::swap1(s, x, y), r1);
            if (StateSpace::s2(s, x) != StateSpace::s2(s, y))
                row.emplace_back(StateSpace::swap2(s, x, y), r2);
            if (p.K > 0.0 && StateSpace::s1(s, x) && StateSpace::s2(s, x))
                row.emplace_back(StateSpace::kill_at(s, x), p.K);
        }
        // merge duplicate targets (the N = 2 doubled bond)
        std::sort(row.begin(), row.end());
        double out = 0.0;
        for (std::size_t i = 0; i < row.size();) {
            std::size_t j = i;
            double acc = 0.0;
            while (j < row.size() && row[j].first == row[i].first) acc += row[j++].second;
            g.col.push_back(row[i].first);
            g.rate.push_back(acc);
            out += acc;
            i = j;
        }
        g.diag[s] = -out;
        g.row_ptr[s + 1] = static_cast<long>(g.col.size());
    }

    // transpose for the forward equation
    const long nnz = static_cast<long>(g.col.size());
    g.trow_ptr.assign(n + 1, 0);
    for (long k = 0; k < nnz; ++k) ++g.trow_ptr[g.col[k] + 1];
    for (long s = 0; s < n; ++s) g.trow_ptr[s + 1] += g.trow_ptr[s];
    g.tcol.assign(nnz, 0);
    g.trate.assign(nnz, 0.0);
    std::vector<long> cursor(g.trow_ptr.begin(), g.trow_ptr.end() - 1);
    for (long s = 0; s < n; ++s)
        for (long k = g.row_ptr[s]; k < g.row_ptr[s + 1]; ++k) {
            long dst = cursor[g.col[k]]++;
            g.tcol[dst] = s;
            g.trate[dst] = g.rate[k];
        }
    return g;
}

void Generator::apply_forward(const double* mu, double* dmu, bool parallel) const {
    const long n = space.nstates();
#pragma omp parallel for if (parallel) schedule(static)
    for (long s = 0; s < n; ++s) {
        double acc = diag[s] * mu[s];
        for (long k = trow_ptr[s]; k < trow_ptr[s + 1]; ++k) acc += trate[k] * mu[tcol[k]];
        dmu[s] = acc;
    }
}

double Generator::max_abs_row_sum() const {
    double worst = 0.0;
    for (long s = 0; s < space.nstates(); ++s) {
        KahanSum acc;
        acc.add(diag[s]);
        for (long k = row_ptr[s]; k < row_ptr[s + 1]; ++k) acc.add(rate[k]);
        worst = std::max(worst, std::abs(acc.value()));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// measures and functionals

std::vector<double> product_weights(const StateSpace& sp, const DensityField& u1,
                                    const DensityField& u2) {
    const int N = sp.sites();
    if (u1.size() != N || u2.size() != N)
        throw std::invalid_argument("product_weights: field size mismatch");
    for (int x = 0; x < N; ++x)
        if (u1[x] <= 0.0 || u1[x] >= 1.0 || u2[x] <= 0.0 || u2[x] >= 1.0)
            throw std::invalid_argument("product_weights: means must lie strictly in (0,1)");
    std::vector<double> nu(sp.nstates());
    for (long s = 0; s < sp.nstates(); ++s) {
        double w = 1.0;
        for (int x = 0; x < N; ++x) {
            w *= StateSpace::s1(s, x) ? u1[x] : 1.0 - u1[x];
            w *= StateSpace::s2(s, x) ? u2[x] : 1.0 - u2[x];
        }
        nu[s] = w;
    }
    return nu;
}

double relative_entropy(const std::vector<double>& mu, const std::vector<double>& nu) {
    if (mu.size() != nu.size()) throw std::invalid_argument("relative_entropy: size mismatch");
    KahanSum acc;
    for (std::size_t s = 0; s < mu.size(); ++s) {
        if (nu[s] <= 0.0) throw std::invalid_argument("relative_entropy: nu must have full support");
        if (mu[s] > 0.0) acc.add(mu[s] * std::log(mu[s] / nu[s]));
    }
    return acc.value();
}

double dirichlet_form(const std::vector<double>& f, const std::vector<double>& nu,
                      const StateSpace& sp, double d1, double d2) {
    const int N = sp.sites();
    KahanSum acc;
    for (long s = 0; s < sp.nstates(); ++s) {
        double local = 0.0;
        for (int x = 0; x < N; ++x) {
            int y = (x + 1) % N;
            double g1 = f[StateSpace::swap1(s, x, y)] - f[s];
            double g2 = f[StateSpace::swap2(s, x, y)] - f[s];
            local += d1 * g1 * g1 + d2 * g2 * g2;
        }
        acc.add(nu[s] * local);
    }
    // ordered pairs double each directed bond; with the 1/4 prefactor the
    // per-bond weight is 1/2
    return 0.5 * acc.value();
}

double dirichlet_form_bond(const std::vector<double>& f, const std::vector<double>& nu,
                           const StateSpace& sp, int x, int y, double d1, double d2) {
    KahanSum acc;
    for (long s = 0; s < sp.nstates(); ++s) {
        double g1 = f[StateSpace::swap1(s, x, y)] - f[s];
        double g2 = f[StateSpace::swap2(s, x, y)] - f[s];
        acc.add(nu[s] * (d1 * g1 * g1 + d2 * g2 * g2));
    }
    return 0.5 * acc.value();
}

// ---------------------------------------------------------------------------
// adaptive embedded RK (Cash-Karp) on plain vectors

namespace {

template <class Rhs>
void rk45(std::vector<double>& y, double t0, double t1, double tol, Rhs&& rhs) {
    static const double a2 = 1.0 / 5, a3 = 3.0 / 10, a4 = 3.0 / 5, a5 = 1.0, a6 = 7.0 / 8;
    static const double b21 = 1.0 / 5;
    static const double b31 = 3.0 / 40, b32 = 9.0 / 40;
    static const double b41 = 3.0 / 10, b42 = -9.0 / 10, b43 = 6.0 / 5;
    static const double b51 = -11.0 / 54, b52 = 5.0 / 2, b53 = -70.0 / 27, b54 = 35.0 / 27;
    static const double b61 = 1631.0 / 55296, b62 = 175.0 / 512, b63 = 575.0 / 13824,
                        b64 = 44275.0 / 110592, b65 = 253.0 / 4096;
    static const double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594, c6 = 512.0 / 1771;
    static const double d1 = 2825.0 / 27648, d3 = 18575.0 / 48384, d4 = 13525.0 / 55296,
                        d5 = 277.0 / 14336, d6 = 1.0 / 4;

    const std::size_t n = y.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), tmp(n), y5(n);
    double t = t0;
    double h = (t1 - t0) * 0.01;
    if (h <= 0.0) return;
    (void)a2; (void)a3; (void)a4; (void)a5; (void)a6;

    while (t < t1) {
        h = std::min(h, t1 - t);
        rhs(y.data(), k1.data());
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * b21 * k1[i];
        rhs(tmp.data(), k2.data());
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (b31 * k1[i] + b32 * k2[i]);
        rhs(tmp.data(), k3.data());
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (b41 * k1[i] + b42 * k2[i] + b43 * k3[i]);
        rhs(tmp.data(), k4.data());
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (b51 * k1[i] + b52 * k2[i] + b53 * k3[i] + b54 * k4[i]);
        rhs(tmp.data(), k5.data());
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] +
                     h * (b61 * k1[i] + b62 * k2[i] + b63 * k3[i] + b64 * k4[i] + b65 * k5[i]);
        rhs(tmp.data(), k6.data());

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double y5i = y[i] + h * (c1 * k1[i] + c3 * k3[i] + c4 * k4[i] + c6 * k6[i]);
            double y4i = y[i] + h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                     d6 * k6[i]);
            y5[i] = y5i;
            double sc = tol * (1.0 + std::abs(y[i]));
            err = std::max(err, std::abs(y5i - y4i) / sc);
        }
        if (err <= 1.0) {
            y.swap(y5);
            t += h;
        }
        double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::min(5.0, std::max(0.2, grow));
        if (h < 1e-14 * (t1 - t0))
            throw std::runtime_error("rk45: step size underflow");
    }
}

} // namespace

std::vector<double> evolve_master(const Generator& g, std::vector<double> mu0, double T,
                                  double tol) {
    if (static_cast<long>(mu0.size()) != g.space.nstates())
        throw std::invalid_argument("evolve_master: distribution size mismatch");
    if (T <= 0.0) return mu0;
    rk45(mu0, 0.0, T, tol,
         [&](const double* y, double* dy) { g.apply_forward(y, dy, true); });
    return mu0;
}

void evolve_densities(DensityField& u1, DensityField& u2, const MasterParams& p, double t0,
                      double t1, double tol) {
    const int N = p.N;
    const Torus torus(1, N);
    std::vector<double> y(2 * N);
    for (int x = 0; x < N; ++x) {
        y[x] = u1[x];
        y[N + x] = u2[x];
    }
    HydroParams hp{p.d1, p.d2, p.K};
    HydroState s(torus);
    std::vector<double> du1, du2;
    rk45(y, t0, t1, tol, [&](const double* yy, double* dy) {
        for (int x = 0; x < N; ++x) {
            s.u1[x] = yy[x];
            s.u2[x] = yy[N + x];
        }
        hydro_rhs(s, hp, du1, du2);
        for (int x = 0; x < N; ++x) {
            dy[x] = du1[x];
            dy[N + x] = du2[x];
        }
    });
    for (int x = 0; x < N; ++x) {
        u1[x] = y[x];
        u2[x] = y[N + x];
    }
}

// ---------------------------------------------------------------------------
// entropy-method identities

std::vector<double> adjoint_one(const Generator& g, const std::vector<double>& nu) {
    const long n = g.space.nstates();
    std::vector<double> out(n);
#pragma omp parallel for schedule(static)
    for (long s = 0; s < n; ++s) {
        double acc = 0.0;
        for (long k = g.trow_ptr[s]; k < g.trow_ptr[s + 1]; ++k)
            acc += g.trate[k] * nu[g.tcol[k]];
        out[s] = acc / nu[s] + g.diag[s];
    }
    return out;
}

namespace {

// omega_i(x, s) tables, one row per site, indexed by the occupation bit
struct OmegaTables {
    std::vector<double> w1_0, w1_1, w2_0, w2_1; // value for sigma = 0 / 1 at x
};

OmegaTables omega_tables(const DensityField& u1, const DensityField& u2) {
    const long N = u1.size();
    OmegaTables t;
    t.w1_0.resize(N);
    t.w1_1.resize(N);
    t.w2_0.resize(N);
    t.w2_1.resize(N);
    for (long x = 0; x < N; ++x) {
        double a = u1[x], b = u2[x];
        if (a <= 0.0 || a >= 1.0 || b <= 0.0 || b >= 1.0)
            throw std::invalid_argument("omega_tables: degenerate density");
        t.w1_0[x] = (0.0 - a) / (a * (1.0 - a));
        t.w1_1[x] = (1.0 - a) / (a * (1.0 - a));
        t.w2_0[x] = (0.0 - b) / (b * (1.0 - b));
        t.w2_1[x] = (1.0 - b) / (b * (1.0 - b));
    }
    return t;
}

} // namespace

std::vector<double> dt_log_psi(const StateSpace& sp, const DensityField& u1,
                               const DensityField& u2, const MasterParams& p) {
    const int N = sp.sites();
    HydroParams hp{p.d1, p.d2, p.K};
    HydroState s(Torus(1, N));
    s.u1 = u1;
    s.u2 = u2;
    std::vector<double> du1, du2;
    hydro_rhs(s, hp, du1, du2);
    OmegaTables ot = omega_tables(u1, u2);

    std::vector<double> out(sp.nstates());
    for (long st = 0; st < sp.nstates(); ++st) {
        double acc = 0.0;
        for (int x = 0; x < N; ++x) {
            acc += du1[x] * (StateSpace::s1(st, x) ? ot.w1_1[x] : ot.w1_0[x]);
            acc += du2[x] * (StateSpace::s2(st, x) ? ot.w2_1[x] : ot.w2_0[x]);
        }
        out[st] = acc;
    }
    return out;
}

std::vector<double> v_decomposition(const StateSpace& sp, const DensityField& u1,
                                    const DensityField& u2, const MasterParams& p) {
    const int N = sp.sites();
    const double N2 = static_cast<double>(N) * N;
    OmegaTables ot = omega_tables(u1, u2);

    std::vector<double> out(sp.nstates());
    for (long st = 0; st < sp.nstates(); ++st) {
        double v1 = 0.0, v2 = 0.0, v = 0.0;
        for (int x = 0; x < N; ++x) {
            int y = (x + 1) % N;
            double w1x = StateSpace::s1(st, x) ? ot.w1_1[x] : ot.w1_0[x];
            double w1y = StateSpace::s1(st, y) ? ot.w1_1[y] : ot.w1_0[y];
            double w2x = StateSpace::s2(st, x) ? ot.w2_1[x] : ot.w2_0[x];
            double w2y = StateSpace::s2(st, y) ? ot.w2_1[y] : ot.w2_0[y];
            double g1 = u1[y] - u1[x], g2 = u2[y] - u2[x];
            // ordered pairs double each directed bond: factor d_i N^2 (not /2)
            v1 += -p.d1 * N2 * g1 * g1 * w1x * w1y;
            v2 += -p.d2 * N2 * g2 * g2 * w2x * w2y;
            v += p.K * (u1[x] + u2[x] - 1.0) * u1[x] * u2[x] * w1x * w2x;
        }
        out[st] = v1 + v2 + v;
    }
    return out;
}

double verify_V_decomposition(const DensityField& u1, const DensityField& u2,
                              const MasterParams& p) {
    StateSpace sp(p.N);
    Generator g = build_generator(p);
    std::vector<double> nu = product_weights(sp, u1, u2);
    std::vector<double> lhs = adjoint_one(g, nu);
    std::vector<double> dpsi = dt_log_psi(sp, u1, u2, p);
    std::vector<double> rhs = v_decomposition(sp, u1, u2, p);
    double worst = 0.0;
    for (long s = 0; s < sp.nstates(); ++s)
        worst = std::max(worst, std::abs((lhs[s] - dpsi[s]) - rhs[s]));
    return worst;
}

std::vector<EntropyIneqPoint> verify_entropy_inequality(const DensityField& u10,
                                                        const DensityField& u20,
                                                        const MasterParams& p,
                                                        const std::vector<double>& times,
                                                        double h_t, double evolve_tol) {
    StateSpace sp(p.N);
    Generator g = build_generator(p);
    const double N2 = static_cast<double>(p.N) * p.N;

    // all time points needed, in order
    std::vector<double> pts;
    for (double t : times) {
        pts.push_back(t - h_t);
        pts.push_back(t);
        pts.push_back(t + h_t);
    }
    std::sort(pts.begin(), pts.end());
    if (pts.front() < 0.0) throw std::invalid_argument("verify_entropy_inequality: t - h < 0");

    // march mu and the density pair through the sorted schedule
    DensityField u1 = u10, u2 = u20;
    std::vector<double> mu = product_weights(sp, u1, u2); // mu_0 = nu_0
    double cur = 0.0;
    std::vector<std::vector<double>> mus;
    std::vector<DensityField> u1s, u2s;
    for (double t : pts) {
        if (t > cur) {
            mu = evolve_master(g, mu, 0.0 < t - cur ? t - cur : 0.0, evolve_tol);
            evolve_densities(u1, u2, p, cur, t);
            cur = t;
        }
        mus.push_back(mu);
        u1s.push_back(u1);
        u2s.push_back(u2);
    }

    auto entropy_at = [&](std::size_t k) {
        std::vector<double> nu = product_weights(sp, u1s[k], u2s[k]);
        return relative_entropy(mus[k], nu);
    };

    std::vector<EntropyIneqPoint> out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        // locate the triple for times[i] in the sorted schedule
        auto it = std::lower_bound(pts.begin(), pts.end(), times[i] - h_t / 2);
        std::size_t k = static_cast<std::size_t>(it - pts.begin());
        while (k < pts.size() && std::abs(pts[k] - times[i]) > h_t / 2) ++k;
        if (k == 0 || k + 1 >= pts.size()) throw std::runtime_error("schedule lookup failed");

        EntropyIneqPoint pt;
        pt.t = times[i];
        double Hm = entropy_at(k - 1), Hp = entropy_at(k + 1);
        pt.dHdt = (Hp - Hm) / (pts[k + 1] - pts[k - 1]);

        std::vector<double> nu = product_weights(sp, u1s[k], u2s[k]);
        std::vector<double> sqf(sp.nstates());
        for (long s = 0; s < sp.nstates(); ++s) sqf[s] = std::sqrt(std::max(0.0, mus[k][s] / nu[s]));
        pt.dissipation = 2.0 * N2 * dirichlet_form(sqf, nu, sp, p.d1, p.d2);

        std::vector<double> a1 = adjoint_one(g, nu);
        std::vector<double> dpsi = dt_log_psi(sp, u1s[k], u2s[k], p);
        KahanSum prod;
        for (long s = 0; s < sp.nstates(); ++s) prod.add(mus[k][s] * (a1[s] - dpsi[s]));
        pt.production = prod.value();

        pt.margin = (-pt.dissipation + pt.production) - pt.dHdt;
        out.push_back(pt);
    }
    return out;
}

IbpResult verify_ibp(const StateSpace& sp, const std::vector<double>& h,
                     const std::vector<double>& f, int x, int y, const DensityField& u1,
                     const DensityField& u2, double c1, double c2, double K) {
    std::vector<double> nu = product_weights(sp, u1, u2);
    const double ux = u2[x], uy = u2[y];

    auto r_xy = [&](long s) {
        int sx = StateSpace::s2(s, x), sy = StateSpace::s2(s, y);
        if (sx == 1 && sy == 0) return (uy - ux) / (ux * (1.0 - uy));
        if (sx == 0 && sy == 1) return (ux - uy) / ((1.0 - ux) * uy);
        return 0.0;
    };

    IbpResult r;
    KahanSum lhs, main_term, term2, term3, habs, swap_gap;
    double hswap_inf = 0.0;
    for (long s = 0; s < sp.nstates(); ++s) {
        long sw = StateSpace::swap2(s, x, y);
        double s2x = StateSpace::s2(s, x);
        double s2y = StateSpace::s2(s, y);
        lhs.add(nu[s] * h[s] * (s2y - s2x) * f[s]);
        main_term.add(nu[s] * h[sw] * s2x * (f[sw] - f[s]));
        term2.add(nu[s] * (h[sw] - h[s]) * s2x * f[s]);
        term3.add(nu[s] * h[sw] * s2x * f[sw] * r_xy(s));
        habs.add(nu[s] * std::abs(h[s]) * f[s]);
        hswap_inf = std::max(hswap_inf, std::abs(h[s] - h[sw]));
    }
    r.lhs = lhs.value();
    r.main_term = main_term.value();
    r.r1 = term2.value() + term3.value();
    r.identity_defect = std::abs(r.lhs - r.main_term - r.r1);

    const double C = (1.0 + c2) / ((1.0 - c2) * (1.0 - c2));
    r.bound = hswap_inf + C * std::exp(2.0 * c1 * K) * std::abs(uy - ux) * habs.value();
    r.within_bound = std::abs(r.r1) <= r.bound + 1e-14;
    return r;
}

LdpEstimate ldp_estimate(const DensityField& u1, const TestFn& phi, double eps, long replicas,
                         std::uint64_t seed, bool phi_is_one_and_const) {
    const Torus& torus = u1.torus;
    const long N = torus.nsites();
    LdpEstimate est;
    est.N = N;
    est.replicas = replicas;

    // reference pairing <u_1, phi> on the lattice
    double ref = 0.0;
    {
        double r[3];
        for (long s = 0; s < N; ++s) {
            auto c = torus.coords(s);
            for (int j = 0; j < torus.dim(); ++j) r[j] = static_cast<double>(c[j]) / torus.side();
            ref += u1[s] * phi(r, torus.dim());
        }
        ref /= static_cast<double>(N);
    }

    long hits = 0;
#pragma omp parallel reduction(+ : hits)
    {
#pragma omp for schedule(static)
        for (long rep = 0; rep < replicas; ++rep) {
            Xoshiro256pp rng = replica_stream(seed, static_cast<std::uint64_t>(rep));
            double acc = 0.0;
            double r[3];
            for (long s = 0; s < N; ++s) {
                if (!rng.bernoulli(u1[s])) continue;
                auto c = torus.coords(s);
                for (int j = 0; j < torus.dim(); ++j)
                    r[j] = static_cast<double>(c[j]) / torus.side();
                acc += phi(r, torus.dim());
            }
            acc /= static_cast<double>(N);
            if (std::abs(acc - ref) > eps) ++hits;
        }
    }
    est.hits = hits;
    est.p_hat = static_cast<double>(hits) / replicas;
    est.ci = clopper_pearson(hits, replicas);
    double p_for_rate = hits > 0 ? est.p_hat : est.ci.hi;
    est.rate = -std::log(p_for_rate) / static_cast<double>(N);
    if (phi_is_one_and_const) est.exact = binom_two_sided_exceedance(N, u1[0], eps);
    return est;
}

} // namespace latseg
