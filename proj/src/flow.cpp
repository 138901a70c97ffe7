#include "latseg/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "latseg/dct.hpp"
#include "latseg/stats.hpp"

namespace latseg {

// ---------------------------------------------------------------------------
// kernels

double AveragingKernel::p1_axis(int x) const {
    return (x >= 1 && x <= ell) ? 1.0 / ell : 0.0;
}

double AveragingKernel::q1_axis(int x) const {
    if (x < 2 || x > 2 * ell) return 0.0;
    int count = ell - std::abs(x - (ell + 1)); // #{(y,z) in {1..ell}^2 : y+z = x}
    return static_cast<double>(count) / (static_cast<double>(ell) * ell);
}

double AveragingKernel::q0_axis(int m) const { return q1_axis(m + 2); }

double AveragingKernel::p(const std::array<int, 3>& c) const {
    double v = 1.0;
    for (int j = 0; j < d; ++j) v *= p1_axis(c[j]);
    return v;
}

double AveragingKernel::q(const std::array<int, 3>& c) const {
    double v = 1.0;
    for (int j = 0; j < d; ++j) v *= q1_axis(c[j]);
    return v;
}

double AveragingKernel::q0(const std::array<int, 3>& c) const {
    double v = 1.0;
    for (int j = 0; j < d; ++j) v *= q0_axis(c[j]);
    return v;
}

double AveragingKernel::p_sum() const {
    double axis = 0.0;
    for (int x = 1; x <= ell; ++x) axis += p1_axis(x);
    return std::pow(axis, d);
}

double AveragingKernel::q_sum() const {
    double axis = 0.0;
    for (int x = 2; x <= 2 * ell; ++x) axis += q1_axis(x);
    return std::pow(axis, d);
}

AveragingKernel build_kernels(int ell, int d) {
    if (ell < 1) throw std::invalid_argument("build_kernels: ell must be >= 1");
    if (d < 1 || d > 3) throw std::invalid_argument("build_kernels: d must be 1..3");
    AveragingKernel k;
    k.ell = ell;
    k.d = d;
    return k;
}

// ---------------------------------------------------------------------------
// flows

double LatticeFlow::edge_value(long x, int axis) const {
    // callers pass in-box x with x+e_j in box; bounds are checked here for
    // the generic sweeps
    if (potential_backed) return phi[x] - phi[x + box_stride(axis)];
    return edges[axis][x];
}

double LatticeFlow::divergence(long x) const {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
        long st = box_stride(j);
        int c = static_cast<int>((x / st) % dims[j]);
        if (c + 1 < dims[j]) acc += edge_value(x, j);
        if (c > 0) acc -= edge_value(x - st, j);
    }
    return acc;
}

double LatticeFlow::divergence_defect() const {
    const long n = box_size();
    double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
    for (long x = 0; x < n; ++x) {
        double want = (x == 0 ? 1.0 : 0.0) - target[x];
        double defect = std::abs(divergence(x) - want);
        if (defect > worst) worst = defect;
    }
    return worst;
}

double LatticeFlow::energy() const {
    const long n = box_size();
    double total = 0.0;
    for (int j = 0; j < d; ++j) {
        long st = box_stride(j);
        KahanSum acc;
        for (long x = 0; x < n; ++x) {
            int c = static_cast<int>((x / st) % dims[j]);
            if (c + 1 >= dims[j]) continue;
            double v = edge_value(x, j);
            acc.add(v * v);
        }
        total += acc.value();
    }
    return total;
}

LatticeFlow build_flow_p_1d(int ell) {
    if (ell < 1) throw std::invalid_argument("build_flow_p_1d: ell must be >= 1");
    LatticeFlow f;
    f.d = 1;
    f.ell = ell;
    f.dims = {ell + 1, 1, 1};
    f.target.assign(ell + 1, 0.0);
    AveragingKernel k = build_kernels(ell, 1);
    for (int x = 1; x <= ell; ++x) f.target[x] = k.p1_axis(x);
    f.edges[0].assign(ell + 1, 0.0);
    for (int x = 0; x < ell; ++x)
        f.edges[0][x] = static_cast<double>(ell - x) / ell; // affine closed form
    return f;
}

LatticeFlow build_flow(int ell, int d) {
    if (ell < 1) throw std::invalid_argument("build_flow: ell must be >= 1");
    if (d < 1 || d > 3) throw std::invalid_argument("build_flow: d must be 1..3");
    AveragingKernel k = build_kernels(ell, d);
    LatticeFlow f;
    f.d = d;
    f.ell = ell;
    const int side = 2 * ell;
    for (int j = 0; j < d; ++j) f.dims[j] = side;
    const long n = f.box_size();

    f.target.assign(n, 0.0);
    {
        // dense zero-based q on the box (separable product of axis factors)
        std::array<int, 3> c{0, 0, 0};
        for (long x = 0; x < n; ++x) {
            long rem = x;
            for (int j = d - 1; j >= 0; --j) {
                c[j] = static_cast<int>(rem % side);
                rem /= side;
            }
            f.target[x] = k.q0(c);
        }
    }

    if (d == 1) {
        // cumulative closed form; exact rationals (integer counts / ell^2)
        f.edges[0].assign(n, 0.0);
        const double ell2 = static_cast<double>(ell) * ell;
        long cum = 0; // integer count of q-mass at or left of m
        for (int m = 0; m + 1 < side; ++m) {
            int count = ell - std::abs(m + 2 - (ell + 1)); // ell^2 q0(m)
            if (count > 0) cum += count;
            f.edges[0][m] = (ell2 - cum) / ell2;
        }
        return f;
    }

    // minimum-energy flow: solve Lap(phi) = q0 - delta_0, Phi(x,y) = phi(x) - phi(y)
    f.potential_backed = true;
    f.phi = f.target;
    f.phi[0] -= 1.0;
    {
        std::array<int, 3> dims3{1, 1, 1};
        for (int j = 0; j < d; ++j) dims3[j] = f.dims[j];
        neumann_poisson(f.phi, dims3, d);
    }
    double defect = f.divergence_defect();
    if (defect > 1e-12)
        throw std::runtime_error("build_flow: Poisson solve defect above tolerance");
    return f;
}

LatticeFlow build_flow_q_1d_composed(int ell) {
    // q-flow as the p-average of translated p-flows, in the zero-based
    // convention: start from the 0-based p-flow (delta_0 -> p0 on
    // {0..ell-1}), then add p0(y) copies shifted by y.
    LatticeFlow f;
    f.d = 1;
    f.ell = ell;
    const int side = 2 * ell;
    f.dims = {side, 1, 1};
    AveragingKernel k = build_kernels(ell, 1);
    f.target.assign(side, 0.0);
    for (int m = 0; m < side; ++m) f.target[m] = k.q0_axis(m);

    // 0-based p-flow: Phi_p(x, x+1) = 1 - (x+1)/ell on {0..ell-1}
    std::vector<double> phi_p(side, 0.0);
    for (int x = 0; x + 1 <= ell - 1; ++x)
        phi_p[x] = static_cast<double>(ell - 1 - x) / ell;

    f.edges[0].assign(side, 0.0);
    for (int x = 0; x < side; ++x) f.edges[0][x] = phi_p[x];
    for (int y = 0; y <= ell - 1; ++y) {
        const double w = 1.0 / ell; // p0(y)
        for (int x = 0; x + y < side; ++x) f.edges[0][x + y] += w * phi_p[x];
    }
    return f;
}

double flow_energy_scale(int d, int ell) {
    if (d == 1) return static_cast<double>(ell);
    if (d == 2) return std::log(static_cast<double>(ell));
    return 1.0;
}

// ---------------------------------------------------------------------------
// local averages and the telescoping identity

double local_average(const std::vector<double>& g, const Torus& torus, long x, int ell,
                     bool left) {
    if (ell < 1 || ell > torus.side())
        throw std::invalid_argument("local_average: need 1 <= ell <= N");
    const int d = torus.dim();
    double acc = 0.0;
    std::array<int, 3> y{0, 0, 0};
    long count = 1;
    for (int j = 0; j < d; ++j) count *= ell;
    for (long k = 0; k < count; ++k) {
        long rem = k;
        long site = x;
        for (int j = d - 1; j >= 0; --j) {
            y[j] = static_cast<int>(rem % ell);
            rem /= ell;
            site = torus.shift(site, j, left ? -y[j] : +y[j]);
        }
        acc += g[site];
    }
    return acc / static_cast<double>(count);
}

OmegaFields omega_fields(const PairConfig& cfg, const DensityField& u1,
                         const DensityField& u2) {
    const long n = cfg.torus.nsites();
    if (u1.size() != n || u2.size() != n)
        throw std::invalid_argument("omega_fields: size mismatch");
    OmegaFields f;
    f.w1.resize(n);
    f.w2.resize(n);
    f.wt1.resize(n);
    for (long x = 0; x < n; ++x) {
        double a = u1[x], b = u2[x];
        if (a <= 0.0 || a >= 1.0 || b <= 0.0 || b >= 1.0)
            throw std::invalid_argument("omega_fields: densities must lie strictly in (0,1)");
        f.w1[x] = (cfg.sigma1[x] - a) / (a * (1.0 - a));
        f.w2[x] = (cfg.sigma2[x] - b) / (b * (1.0 - b));
        f.wt1[x] = (a + b - 1.0) * a * b * f.w1[x];
    }
    return f;
}

double h_field(const std::vector<double>& wt1, const Torus& torus, const LatticeFlow& flow,
               long x, int axis) {
    const int d = torus.dim();
    if (flow.d != d) throw std::invalid_argument("h_field: flow dimension mismatch");
    double acc = 0.0;
    std::array<int, 3> m{0, 0, 0};
    const long edges = flow.box_size();
    for (long k = 0; k < edges; ++k) {
        long rem = k;
        bool in_edge_range = true;
        long site = x;
        for (int j = d - 1; j >= 0; --j) {
            m[j] = static_cast<int>(rem % flow.dims[j]);
            rem /= flow.dims[j];
            site = torus.shift(site, j, -m[j]);
        }
        if (m[axis] + 1 >= flow.dims[axis]) in_edge_range = false;
        if (!in_edge_range) continue;
        double phi = flow.edge_value(k, axis);
        if (phi != 0.0) acc -= wt1[site] * phi;
    }
    return acc;
}

double h_field(const PairConfig& cfg, const DensityField& u1, const DensityField& u2,
               const LatticeFlow& flow, long x, int axis) {
    OmegaFields f = omega_fields(cfg, u1, u2);
    return h_field(f.wt1, cfg.torus, flow, x, axis);
}

TelescopingResult telescoping_check(const PairConfig& cfg, const DensityField& u1,
                                    const DensityField& u2, double K, int ell) {
    const Torus& torus = cfg.torus;
    const int d = torus.dim();
    const long n = torus.nsites();
    OmegaFields f = omega_fields(cfg, u1, u2);
    LatticeFlow flow = build_flow(ell, d);

    TelescopingResult r;
    KahanSum V, Vell, rhs;
    for (long x = 0; x < n; ++x) V.add(f.wt1[x] * f.w2[x]);
    for (long x = 0; x < n; ++x)
        Vell.add(local_average(f.wt1, torus, x, ell, /*left=*/true) *
                 local_average(f.w2, torus, x, ell, /*left=*/false));
    for (int j = 0; j < d; ++j)
        for (long x = 0; x < n; ++x) {
            double h = h_field(f.wt1, torus, flow, x, j);
            rhs.add(h * (f.w2[torus.shift(x, j, +1)] - f.w2[x]));
        }
    r.V = K * V.value();
    r.Vell = K * Vell.value();
    r.lhs = r.V - r.Vell;
    r.rhs = K * rhs.value();
    r.defect = std::abs(r.lhs - r.rhs);
    return r;
}

// ---------------------------------------------------------------------------
// concentration inequality

namespace {
double kappa_of(const std::vector<TwoPointVar>& vars) {
    double k = 0.0;
    for (const auto& v : vars) k += (v.b - v.a) * (v.b - v.a);
    return k;
}
} // namespace

ConcentrationResult concentration_exact(const std::vector<TwoPointVar>& vars, double gamma) {
    const int n = static_cast<int>(vars.size());
    if (n > 26) throw std::invalid_argument("concentration_exact: enumeration too large");
    ConcentrationResult r;
    r.kappa = kappa_of(vars);
    if (gamma < 0.0 || (r.kappa > 0.0 && gamma > 1.0 / r.kappa))
        throw std::invalid_argument("concentration_exact: gamma outside [0, 1/kappa]");
    double mean_total = 0.0;
    for (const auto& v : vars) mean_total += v.a + v.p * (v.b - v.a);
    double expval = 0.0;
    for (long mask = 0; mask < (1L << n); ++mask) {
        double w = 1.0, s = 0.0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1L << i)) {
                w *= vars[i].p;
                s += vars[i].b;
            } else {
                w *= 1.0 - vars[i].p;
                s += vars[i].a;
            }
        }
        double centered = s - mean_total;
        expval += w * std::exp(gamma * centered * centered);
    }
    r.lhs = std::log(expval);
    r.rhs = 2.0 * gamma * r.kappa;
    r.ok = r.lhs <= r.rhs + 1e-12;
    return r;
}

ConcentrationResult concentration_mc(const std::vector<TwoPointVar>& vars, double gamma,
                                     long samples, Xoshiro256pp& rng) {
    ConcentrationResult r;
    r.kappa = kappa_of(vars);
    if (gamma < 0.0 || (r.kappa > 0.0 && gamma > 1.0 / r.kappa))
        throw std::invalid_argument("concentration_mc: gamma outside [0, 1/kappa]");
    double mean_total = 0.0;
    for (const auto& v : vars) mean_total += v.a + v.p * (v.b - v.a);
    double sum = 0.0, sumsq = 0.0;
    for (long it = 0; it < samples; ++it) {
        double s = 0.0;
        for (const auto& v : vars) s += rng.bernoulli(v.p) ? v.b : v.a;
        double centered = s - mean_total;
        double e = std::exp(gamma * centered * centered);
        sum += e;
        sumsq += e * e;
    }
    double mean = sum / samples;
    double var = std::max(0.0, sumsq / samples - mean * mean);
    double ucb = mean + 2.576 * std::sqrt(var / samples); // 99% upper bound
    r.lhs = std::log(ucb);
    r.rhs = 2.0 * gamma * r.kappa;
    r.ok = r.lhs <= r.rhs;
    return r;
}

} // namespace latseg
