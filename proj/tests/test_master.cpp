#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "latseg/heat_kernel.hpp"
#include "latseg/master.hpp"
#include "latseg/profiles.hpp"
#include "latseg/rng.hpp"

using namespace latseg;

namespace {

DensityField const_field(int N, double v) {
    DensityField u{Torus(1, N)};
    for (int x = 0; x < N; ++x) u[x] = v;
    return u;
}

DensityField random_field(int N, double lo, double hi, Xoshiro256pp& rng) {
    DensityField u{Torus(1, N)};
    for (int x = 0; x < N; ++x) u[x] = lo + (hi - lo) * rng.uniform01();
    return u;
}

// dense matrix exponential by scaling-and-squaring Taylor; small oracle for
// the adaptive integrator (independent of the RK path)
std::vector<double> expm_apply(const Generator& g, const std::vector<double>& mu0, double T) {
    const long n = g.space.nstates();
    // A = L^T (forward generator), dense
    std::vector<double> A(n * n, 0.0);
    for (long s = 0; s < n; ++s) {
        A[s * n + s] = g.diag[s];
        for (long k = g.row_ptr[s]; k < g.row_ptr[s + 1]; ++k)
            A[g.col[k] * n + s] += g.rate[k]; // transpose into row col[k]
    }
    double norm = 0.0;
    for (long s = 0; s < n; ++s) norm = std::max(norm, std::abs(g.diag[s]) * 2.0);
    int squarings = 0;
    double scale = T;
    while (norm * scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }
    // expm(A*scale) by Taylor to machine precision
    std::vector<double> E(n * n, 0.0), term(n * n, 0.0), tmp(n * n);
    for (long i = 0; i < n; ++i) E[i * n + i] = term[i * n + i] = 1.0;
    for (int k = 1; k <= 24; ++k) {
        // term = term * (A*scale) / k
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j) {
                double acc = 0.0;
                for (long m = 0; m < n; ++m) acc += term[i * n + m] * A[m * n + j];
                tmp[i * n + j] = acc * scale / k;
            }
        term.swap(tmp);
        double tnorm = 0.0;
        for (double v : term) tnorm = std::max(tnorm, std::abs(v));
        for (long i = 0; i < n * n; ++i) E[i] += term[i];
        if (tnorm < 1e-18) break;
    }
    for (int sq = 0; sq < squarings; ++sq) {
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j) {
                double acc = 0.0;
                for (long m = 0; m < n; ++m) acc += E[i * n + m] * E[m * n + j];
                tmp[i * n + j] = acc;
            }
        E.swap(tmp);
    }
    std::vector<double> out(n, 0.0);
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long j = 0; j < n; ++j) acc += E[i * n + j] * mu0[j];
        out[i] = acc;
    }
    return out;
}

} // namespace

TEST_CASE("state space enumeration") {
    CHECK(StateSpace(1).nstates() == 4);
    CHECK(StateSpace(2).nstates() == 16);
    CHECK(StateSpace(8).nstates() == 65536);
    CHECK_THROWS(StateSpace(11));

    StateSpace sp(3);
    PairConfig cfg = sp.to_config(0b100111); // s1 at x0, s2 at x0, s1 at x1? decode check below
    CHECK(sp.from_config(cfg) == 0b100111);
}

TEST_CASE("generator row sums vanish") {
    for (double K : {0.0, 1.0, 2.0}) {
        MasterParams p;
        p.N = 4;
        p.K = K;
        Generator g = build_generator(p);
        CHECK(g.max_abs_row_sum() <= 1e-13);
    }
}

TEST_CASE("constant product measures are stationary for pure exchange") {
    MasterParams p;
    p.N = 5;
    p.K = 0.0;
    p.d1 = 1.3;
    p.d2 = 0.6;
    Generator g = build_generator(p);
    auto nu = product_weights(g.space, const_field(5, 0.35), const_field(5, 0.6));
    std::vector<double> dnu(nu.size());
    g.apply_forward(nu.data(), dnu.data());
    for (double v : dnu) CHECK(std::abs(v) <= 1e-13);
}

TEST_CASE("generator out-rates match the event simulator") {
    MasterParams p;
    p.N = 6;
    p.d1 = 1.1;
    p.d2 = 0.7;
    p.K = 2.5;
    Generator g = build_generator(p);
    SimParams sp;
    sp.d = 1;
    sp.N = 6;
    sp.d1 = p.d1;
    sp.d2 = p.d2;
    sp.K = p.K;
    for (long s = 0; s < g.space.nstates(); s += 7) {
        PairConfig cfg = g.space.to_config(s);
        KawasakiSim sim(cfg, sp);
        CHECK(g.out_rate(s) == doctest::Approx(sim.total_rate()).epsilon(1e-12));
    }
}

TEST_CASE("master evolution basics") {
    MasterParams p;
    p.N = 3;
    p.K = 1.5;
    Generator g = build_generator(p);
    const long n = g.space.nstates();

    SUBCASE("T = 0 returns the initial law") {
        std::vector<double> mu0(n, 0.0);
        mu0[5] = 1.0;
        auto mu = evolve_master(g, mu0, 0.0);
        CHECK(mu == mu0);
    }
    SUBCASE("stationary law stays put at K = 0") {
        MasterParams p0 = p;
        p0.K = 0.0;
        Generator g0 = build_generator(p0);
        auto nu = product_weights(g0.space, const_field(3, 0.4), const_field(3, 0.7));
        auto mu = evolve_master(g0, nu, 0.3, 1e-11);
        for (long s = 0; s < n; ++s) CHECK(mu[s] == doctest::Approx(nu[s]).epsilon(1e-8));
    }
    SUBCASE("probability mass and positivity are preserved") {
        Xoshiro256pp rng(3);
        std::vector<double> mu0(n);
        double z = 0.0;
        for (auto& v : mu0) z += (v = rng.uniform01());
        for (auto& v : mu0) v /= z;
        auto mu = evolve_master(g, mu0, 0.5, 1e-10);
        double total = 0.0;
        for (double v : mu) {
            CHECK(v > -1e-10);
            total += v;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("matrix exponential cross-check at N = 3") {
        Xoshiro256pp rng(8);
        std::vector<double> mu0(n);
        double z = 0.0;
        for (auto& v : mu0) z += (v = rng.uniform01());
        for (auto& v : mu0) v /= z;
        auto rk = evolve_master(g, mu0, 0.07, 1e-12);
        auto ex = expm_apply(g, mu0, 0.07);
        for (long s = 0; s < n; ++s) CHECK(rk[s] == doctest::Approx(ex[s]).epsilon(1e-8));
    }
}

TEST_CASE("exchange means follow the discrete heat flow at K = 0") {
    MasterParams p;
    p.N = 4;
    p.K = 0.0;
    p.d1 = 1.0;
    p.d2 = 2.0;
    Generator g = build_generator(p);
    Xoshiro256pp rng(14);
    DensityField u1 = random_field(4, 0.2, 0.8, rng);
    DensityField u2 = random_field(4, 0.2, 0.8, rng);
    auto mu = product_weights(g.space, u1, u2);
    const double T = 0.03;
    mu = evolve_master(g, mu, T, 1e-11);

    for (int species = 1; species <= 2; ++species) {
        DensityField means{Torus(1, 4)};
        for (long s = 0; s < g.space.nstates(); ++s)
            for (int x = 0; x < 4; ++x)
                means[x] += mu[s] * (species == 1 ? StateSpace::s1(s, x) : StateSpace::s2(s, x));
        DensityField ref = heat_evolve(species == 1 ? u1 : u2, T, species == 1 ? p.d1 : p.d2);
        for (int x = 0; x < 4; ++x) CHECK(std::abs(means[x] - ref[x]) < 1e-8);
    }
}

TEST_CASE("relative entropy") {
    StateSpace sp(2);
    auto uniform = product_weights(sp, const_field(2, 0.5), const_field(2, 0.5));

    SUBCASE("identity gives zero and generic laws are positive") {
        CHECK(relative_entropy(uniform, uniform) == doctest::Approx(0.0));
        std::vector<double> mu(sp.nstates(), 0.0);
        mu[3] = 0.7;
        mu[9] = 0.3;
        CHECK(relative_entropy(mu, uniform) > 0.0);
    }
    SUBCASE("point mass against the uniform product law") {
        std::vector<double> mu(sp.nstates(), 0.0);
        mu[6] = 1.0;
        CHECK(relative_entropy(mu, uniform) == doctest::Approx(4.0 * std::log(2.0)));
    }
    SUBCASE("full support is required") {
        std::vector<double> nu(sp.nstates(), 1.0 / sp.nstates());
        nu[0] = 0.0;
        std::vector<double> mu(sp.nstates(), 1.0 / sp.nstates());
        CHECK_THROWS(relative_entropy(mu, nu));
    }
}

TEST_CASE("dirichlet form") {
    StateSpace sp(2);
    auto nu = product_weights(sp, const_field(2, 0.4), const_field(2, 0.6));

    SUBCASE("constants have zero energy") {
        std::vector<double> f(sp.nstates(), 3.0);
        CHECK(dirichlet_form(f, nu, sp, 1.0, 2.0) == doctest::Approx(0.0));
    }
    SUBCASE("single-site function, hand-reduced") {
        // f = sigma1 at site 0; on N = 2 the two directed bonds double the
        // single exchange pair, and the swap changes f iff the occupations
        // differ: D = (1/2) * 2 * d1 * P(sigma1_0 != sigma1_1)
        std::vector<double> f(sp.nstates());
        for (long s = 0; s < sp.nstates(); ++s) f[s] = StateSpace::s1(s, 0);
        double p_diff = 0.4 * 0.6 + 0.6 * 0.4;
        CHECK(dirichlet_form(f, nu, sp, 1.5, 2.0) == doctest::Approx(1.5 * p_diff));
    }
    SUBCASE("nonnegative on random functions") {
        Xoshiro256pp rng(4);
        std::vector<double> f(sp.nstates());
        for (auto& v : f) v = rng.uniform01() * 2.0 - 1.0;
        CHECK(dirichlet_form(f, nu, sp, 1.0, 1.0) >= 0.0);
    }
}

TEST_CASE("V decomposition is an exact identity") {
    Xoshiro256pp rng(31);

    SUBCASE("constant densities leave only the annihilation part") {
        MasterParams p;
        p.N = 4;
        p.K = 2.0;
        double defect = verify_V_decomposition(const_field(4, 0.3), const_field(4, 0.55), p);
        CHECK(defect <= 1e-11);
    }
    SUBCASE("random fields at several K") {
        for (double K : {0.0, 1.0, 2.0, 4.0}) {
            MasterParams p;
            p.N = 4;
            p.K = K;
            p.d1 = 1.2;
            p.d2 = 0.8;
            DensityField u1 = random_field(4, 0.15, 0.85, rng);
            DensityField u2 = random_field(4, 0.15, 0.85, rng);
            CHECK(verify_V_decomposition(u1, u2, p) <= 1e-10);
        }
    }
    SUBCASE("N = 6 stays exact") {
        MasterParams p;
        p.N = 6;
        p.K = 3.0;
        DensityField u1 = random_field(6, 0.2, 0.8, rng);
        DensityField u2 = random_field(6, 0.2, 0.8, rng);
        CHECK(verify_V_decomposition(u1, u2, p) <= 1e-10);
    }
}

TEST_CASE("entropy-derivative inequality margins") {
    MasterParams p;
    p.N = 3;
    p.K = 1.0;
    Xoshiro256pp rng(6);
    DensityField u1 = random_field(3, 0.35, 0.65, rng);
    DensityField u2 = random_field(3, 0.35, 0.65, rng);
    std::vector<double> times{0.05, 0.2, 0.5};
    auto pts = verify_entropy_inequality(u1, u2, p, times, 1e-4, 1e-11);
    REQUIRE(pts.size() == times.size());
    for (const auto& pt : pts) {
        CHECK(pt.margin >= -1e-6);
        CHECK(pt.dissipation >= 0.0);
    }
}

TEST_CASE("integration by parts by enumeration") {
    StateSpace sp(4);
    Xoshiro256pp rng(17);
    const double c1 = 1.0, c2 = 0.8, K = 1.0;

    auto make_density = [&](const std::vector<double>& nu) {
        std::vector<double> f(sp.nstates());
        double z = 0.0;
        for (long s = 0; s < sp.nstates(); ++s) z += (f[s] = 0.3 + rng.uniform01()) * nu[s];
        for (auto& v : f) v /= z;
        return f;
    };

    SUBCASE("constant mean and swap-invariant h make R1 vanish") {
        DensityField u1 = random_field(4, 0.3, 0.7, rng);
        DensityField u2 = const_field(4, 0.5);
        auto nu = product_weights(sp, u1, u2);
        auto f = make_density(nu);
        std::vector<double> h(sp.nstates());
        for (long s = 0; s < sp.nstates(); ++s) h[s] = StateSpace::s1(s, 2) + 0.3;
        auto r = verify_ibp(sp, h, f, 1, 2, u1, u2, c1, c2, K);
        CHECK(r.identity_defect <= 1e-13);
        CHECK(std::abs(r.r1) <= 1e-13);
    }
    SUBCASE("unit h and f reduce to the mean difference") {
        DensityField u1 = random_field(4, 0.3, 0.7, rng);
        DensityField u2 = random_field(4, std::exp(-c1 * K), c2, rng);
        auto nu = product_weights(sp, u1, u2);
        std::vector<double> h(sp.nstates(), 1.0), f(sp.nstates(), 1.0);
        auto r = verify_ibp(sp, h, f, 0, 1, u1, u2, c1, c2, K);
        CHECK(r.lhs == doctest::Approx(u2[1] - u2[0]).epsilon(1e-12));
        CHECK(r.identity_defect <= 1e-13);
        CHECK(r.within_bound);
    }
    SUBCASE("random instances satisfy the identity and the bound") {
        for (int inst = 0; inst < 20; ++inst) {
            DensityField u1 = random_field(4, 0.2, 0.8, rng);
            DensityField u2 = random_field(4, std::exp(-c1 * K), c2, rng);
            auto nu = product_weights(sp, u1, u2);
            auto f = make_density(nu);
            int x = static_cast<int>(rng.uniform_index(4));
            int y = (x + 1) % 4;
            // h built from species 1 only: swap-invariant in sigma2
            std::vector<double> h(sp.nstates());
            for (long s = 0; s < sp.nstates(); ++s)
                h[s] = StateSpace::s1(s, 0) * 0.7 - StateSpace::s1(s, 3) * 1.1;
            auto r = verify_ibp(sp, h, f, x, y, u1, u2, c1, c2, K);
            CHECK(r.identity_defect <= 1e-12);
            CHECK(r.within_bound);
        }
    }
}

TEST_CASE("entropy per volume stays small and does not grow with N") {
    // started at the product law of the density path, the relative entropy
    // per site remains a small fraction across lattice sizes
    const double K = 2.0, T = 1.0;
    std::vector<double> per_site;
    for (int N : {2, 4, 6, 8}) {
        MasterParams p;
        p.N = N;
        p.K = K;
        DensityField u1{Torus(1, N)}, u2{Torus(1, N)};
        for (int x = 0; x < N; ++x) {
            u1[x] = 0.5 + 0.06 * (x % 2 == 0 ? 1.0 : -1.0);
            u2[x] = 0.5 - 0.04 * (x % 2 == 0 ? 1.0 : -1.0);
        }
        Generator g = build_generator(p);
        auto mu = product_weights(g.space, u1, u2);
        mu = evolve_master(g, mu, T, 1e-9);
        DensityField v1 = u1, v2 = u2;
        evolve_densities(v1, v2, p, 0.0, T);
        auto nu = product_weights(g.space, v1, v2);
        per_site.push_back(relative_entropy(mu, nu) / N);
    }
    for (double h : per_site) {
        CHECK(h >= -1e-12);
        CHECK(h < 0.05); // bounded per volume
    }
    // decreasing per-volume entropy across the size sweep
    for (std::size_t i = 1; i < per_site.size(); ++i) CHECK(per_site[i] < per_site[i - 1]);
    MESSAGE("entropy per site, N = 2,4,6,8: ", per_site[0], " ", per_site[1], " ",
            per_site[2], " ", per_site[3]);
}

TEST_CASE("bond-level Dirichlet bound structure") {
    // int h (w2_y - w2_x) f dnu <= beta * D_bond(sqrt f)
    //   + (CD / beta) e^{3 c1 K} int h^2 f dnu
    //   + CR e^{3 c1 K} |grad u2| int |h| f dnu
    // with fully explicit constants for swap-invariant h:
    //   CD = (2 + 2 c2/(1-c2)) / (d2 (1-c2)^2)
    //   CR = 2/(1-c2)^2 + (1+c2)/(1-c2)^3
    StateSpace sp(4);
    Xoshiro256pp rng(451);
    const double c1 = 1.0, c2 = 0.8, K = 1.0, d1 = 1.0, d2 = 1.3;
    const double CD = (2.0 + 2.0 * c2 / (1.0 - c2)) / (d2 * (1.0 - c2) * (1.0 - c2));
    const double CR = 2.0 / ((1.0 - c2) * (1.0 - c2)) +
                      (1.0 + c2) / ((1.0 - c2) * (1.0 - c2) * (1.0 - c2));

    for (int inst = 0; inst < 20; ++inst) {
        DensityField u1 = random_field(4, 0.2, 0.8, rng);
        DensityField u2 = random_field(4, std::exp(-c1 * K), c2, rng);
        int x = static_cast<int>(rng.uniform_index(4));
        int y = (x + 1) % 4;
        auto nu = product_weights(sp, u1, u2);
        std::vector<double> h(sp.nstates()), f(sp.nstates()), sqf(sp.nstates());
        for (long s = 0; s < sp.nstates(); ++s) h[s] = 2.0 * rng.uniform01() - 1.0;
        for (long s = 0; s < sp.nstates(); ++s) {
            long sw = StateSpace::swap2(s, x, y);
            if (sw > s) h[sw] = h[s];
        }
        double z = 0.0;
        for (long s = 0; s < sp.nstates(); ++s) z += (f[s] = 0.2 + rng.uniform01()) * nu[s];
        for (auto& v : f) v /= z;
        for (long s = 0; s < sp.nstates(); ++s) sqf[s] = std::sqrt(f[s]);

        // exact left side and the moment integrals
        double lhs = 0.0, habs = 0.0, hsq = 0.0;
        for (long s = 0; s < sp.nstates(); ++s) {
            double w2y = (StateSpace::s2(s, y) - u2[y]) / (u2[y] * (1.0 - u2[y]));
            double w2x = (StateSpace::s2(s, x) - u2[x]) / (u2[x] * (1.0 - u2[x]));
            lhs += nu[s] * h[s] * (w2y - w2x) * f[s];
            habs += nu[s] * std::abs(h[s]) * f[s];
            hsq += nu[s] * h[s] * h[s] * f[s];
        }
        double dbond = dirichlet_form_bond(sqf, nu, sp, x, y, d1, d2);
        double grad = std::abs(u2[y] - u2[x]);
        const double e3 = std::exp(3.0 * c1 * K);
        for (double beta : {0.05, 0.5, 5.0}) {
            double rhs = beta * dbond + (CD / beta) * e3 * hsq + CR * e3 * grad * habs;
            CHECK(lhs <= rhs + 1e-12);
        }
    }
}

TEST_CASE("exceedance estimates against the exact binomial") {
    TestFn one = test_function("one");
    DensityField u{Torus(1, 16), 0.5};
    auto est = ldp_estimate(u, one, 0.2, 40000, 7, true);
    CHECK(est.exact > 0.0);
    CHECK(est.ci.lo <= est.exact);
    CHECK(est.exact <= est.ci.hi);
    CHECK(est.rate > 0.0);
}

TEST_CASE("exceedance decays with the volume") {
    TestFn one = test_function("one");
    double prev_log = 0.0;
    for (int k = 0; k < 3; ++k) {
        int n = 16 << k;
        DensityField u{Torus(1, n), 0.5};
        double exact = binom_two_sided_exceedance(n, 0.5, 0.2);
        double lg = -std::log(exact);
        CHECK(lg > prev_log); // exponent strictly grows with N
        prev_log = lg;
    }
}
