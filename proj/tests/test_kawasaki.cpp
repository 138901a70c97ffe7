#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "latseg/kawasaki.hpp"
#include "latseg/stats.hpp"

using namespace latseg;

namespace {

SimParams params_1d(int N, double K, std::uint64_t seed = 1) {
    SimParams p;
    p.d = 1;
    p.N = N;
    p.d1 = 1.0;
    p.d2 = 1.0;
    p.K = K;
    p.seed = seed;
    return p;
}

PairConfig config_from_bits(const Torus& t, std::initializer_list<int> s1,
                            std::initializer_list<int> s2) {
    PairConfig c(t);
    long i = 0;
    for (int v : s1) c.sigma1[i++] = static_cast<std::uint8_t>(v);
    i = 0;
    for (int v : s2) c.sigma2[i++] = static_cast<std::uint8_t>(v);
    return c;
}

std::string log_to_string(const EventLog& log) {
    std::ostringstream os;
    for (const auto& e : log) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", e.time);
        os << buf << "," << static_cast<int>(e.kind) << "," << e.site << "," << e.axis << ";";
    }
    return os.str();
}

} // namespace

TEST_CASE("bernoulli sampling degenerate and statistical") {
    Torus t(2, 100); // 10^4 sites
    Xoshiro256pp rng(17);

    SUBCASE("all zero / all one") {
        DensityField u0(t, 0.0), u1(t, 1.0);
        PairConfig c = sample_bernoulli_pair(u0, u1, rng);
        CHECK(c.count(1) == 0);
        CHECK(c.count(2) == t.nsites());
    }
    SUBCASE("half density concentrates") {
        DensityField u(t, 0.5);
        PairConfig c = sample_bernoulli_pair(u, u, rng);
        // binomial(10^4, 1/2): 99% interval is 0.5 +- 2.58*0.005
        double mean = static_cast<double>(c.count(1)) / t.nsites();
        CHECK(std::abs(mean - 0.5) < 0.02);
    }
    SUBCASE("rejects out-of-range means") {
        DensityField bad(t, 1.5), ok(t, 0.5);
        CHECK_THROWS(sample_bernoulli_pair(bad, ok, rng));
    }
}

TEST_CASE("total event rate worked example") {
    // N = 4, d1 = d2 = 1, K = 5, both species occupying site 0 only:
    // two discrepant bonds per species, one doubly occupied site
    Torus t(1, 4);
    PairConfig c = config_from_bits(t, {1, 0, 0, 0}, {1, 0, 0, 0});
    KawasakiSim sim(c, params_1d(4, 5.0));
    CHECK(sim.discrepant_bonds(1) == 2);
    CHECK(sim.discrepant_bonds(2) == 2);
    CHECK(sim.doubly_occupied() == 1);
    CHECK(sim.total_rate() == doctest::Approx(69.0));
}

TEST_CASE("total rate vanishes without discrepancies or overlaps") {
    Torus t(1, 6);
    SUBCASE("empty") {
        PairConfig c(t);
        KawasakiSim sim(c, params_1d(6, 3.0));
        CHECK(sim.total_rate() == 0.0);
        CHECK(!sim.step().has_value());
    }
    SUBCASE("one species full, other empty") {
        PairConfig c(t);
        for (long s = 0; s < 6; ++s) c.sigma1[s] = 1;
        KawasakiSim sim(c, params_1d(6, 7.0));
        CHECK(sim.total_rate() == 0.0);
    }
}

TEST_CASE("single enabled transition is a kill with Exp(K) holding time") {
    // both species fully occupied: no discrepant bonds, N kill candidates;
    // with N = 2 there are 2 doubly occupied sites
    Torus t(1, 2);
    PairConfig c = config_from_bits(t, {1, 1}, {1, 1});
    double mean_holding = 0.0;
    const int reps = 4000;
    for (int r = 0; r < reps; ++r) {
        KawasakiSim sim(c, params_1d(2, 3.0, 1000 + r));
        auto ev = sim.step();
        REQUIRE(ev.has_value());
        CHECK(ev->kind == EventKind::Kill);
        mean_holding += ev->time;
    }
    // total kill rate is K * 2 = 6
    mean_holding /= reps;
    CHECK(mean_holding == doctest::Approx(1.0 / 6.0).epsilon(0.1));
}

TEST_CASE("conservation of the species difference and monotone loss") {
    Torus t(1, 32);
    Xoshiro256pp rng(5);
    DensityField u(t, 0.5);
    PairConfig c = sample_bernoulli_pair(u, u, rng);
    KawasakiSim sim(c, params_1d(32, 4.0, 99));
    long diff0 = sim.count(1) - sim.count(2);
    long prev1 = sim.count(1);
    for (int i = 0; i < 20000; ++i) {
        auto ev = sim.step();
        if (!ev) break;
        CHECK(sim.count(1) - sim.count(2) == diff0);
        CHECK(sim.count(1) <= prev1);
        if (sim.count(1) < prev1) CHECK(ev->kind == EventKind::Kill);
        prev1 = sim.count(1);
    }
    CHECK(sim.kills() == c.count(1) - sim.count(1));
}

TEST_CASE("exchange dynamics conserves particle numbers when K = 0") {
    Torus t(1, 16);
    Xoshiro256pp rng(6);
    DensityField u(t, 0.4);
    PairConfig c = sample_bernoulli_pair(u, u, rng);
    long n1 = c.count(1), n2 = c.count(2);
    KawasakiSim sim(c, params_1d(16, 0.0, 7));
    for (int i = 0; i < 5000; ++i)
        if (!sim.step()) break;
    CHECK(sim.count(1) == n1);
    CHECK(sim.count(2) == n2);
    CHECK(sim.kills() == 0);
}

TEST_CASE("incremental tables match recounts along a trajectory") {
    Torus t(2, 8);
    Xoshiro256pp rng(8);
    DensityField u1(t, 0.5), u2(t, 0.3);
    PairConfig c = sample_bernoulli_pair(u1, u2, rng);
    SimParams p;
    p.d = 2;
    p.N = 8;
    p.d1 = 1.0;
    p.d2 = 2.0;
    p.K = 3.0;
    p.seed = 21;
    KawasakiSim sim(c, p);
    for (int i = 0; i < 3000; ++i) {
        if (!sim.step()) break;
        if (i % 100 == 0) CHECK(sim.audit());
    }
    CHECK(sim.audit());
}

TEST_CASE("run is deterministic byte for byte") {
    Torus t(1, 24);
    Xoshiro256pp rng(10);
    DensityField u(t, 0.5);
    PairConfig c = sample_bernoulli_pair(u, u, rng);
    auto one_run = [&]() {
        KawasakiSim sim(c, params_1d(24, 2.0, 777));
        EventLog log;
        sim.run(0.01, {}, [](double, const PairConfig&) {}, &log);
        double prev = 0.0;
        for (const auto& ev : log) {
            CHECK(ev.time > prev); // strictly increasing event clock
            prev = ev.time;
        }
        return log_to_string(log);
    };
    std::string a = one_run(), b = one_run();
    CHECK(!a.empty());
    CHECK(a == b);
}

TEST_CASE("run horizon and observers") {
    Torus t(1, 8);
    PairConfig c = config_from_bits(t, {1, 0, 1, 0, 1, 0, 1, 0}, {0, 0, 0, 0, 0, 0, 0, 0});

    SUBCASE("zero horizon returns immediately") {
        KawasakiSim sim(c, params_1d(8, 1.0));
        EventLog log;
        sim.run(0.0, {}, [](double, const PairConfig&) {}, &log);
        CHECK(log.empty());
        CHECK(sim.time() == 0.0);
    }
    SUBCASE("observers fire at every requested time") {
        KawasakiSim sim(c, params_1d(8, 1.0));
        std::vector<double> seen;
        sim.run(0.02, {0.0, 0.005, 0.01, 0.02}, [&](double tt, const PairConfig&) {
            seen.push_back(tt);
        });
        REQUIRE(seen.size() == 4);
        CHECK(seen[0] == 0.0);
        CHECK(seen[3] == 0.02);
        CHECK(sim.time() == 0.02);
    }
    SUBCASE("absorbing state terminates normally, observers still fire") {
        PairConfig empty(t);
        KawasakiSim sim(empty, params_1d(8, 1.0));
        std::vector<double> seen;
        sim.run(1.0, {0.5, 1.0}, [&](double tt, const PairConfig&) { seen.push_back(tt); });
        CHECK(seen.size() == 2);
    }
}

TEST_CASE("empirical pairing examples") {
    Torus t(1, 4);
    SUBCASE("counting measure mass") {
        PairConfig c = config_from_bits(t, {1, 1, 0, 1}, {0, 0, 0, 0});
        auto one = [](const double*, int) { return 1.0; };
        CHECK(empirical_pairing(c, one, 1) == doctest::Approx(3.0 / 4.0));
        CHECK(empirical_pairing(c, one, 2) == 0.0);
    }
    SUBCASE("linear test function") {
        PairConfig c = config_from_bits(t, {1, 0, 1, 0}, {0, 0, 0, 0});
        auto lin = [](const double* r, int) { return r[0]; };
        CHECK(empirical_pairing(c, lin, 1) == doctest::Approx(0.125));
    }
}

TEST_CASE("kill bookkeeping identity over a run") {
    Torus t(1, 64);
    Xoshiro256pp rng(12);
    DensityField u(t, 0.5);
    PairConfig c = sample_bernoulli_pair(u, u, rng);
    long n1_0 = c.count(1), n2_0 = c.count(2);
    KawasakiSim sim(c, params_1d(64, 3.0, 5));
    sim.run(0.05, {}, [](double, const PairConfig&) {});
    CHECK(sim.kills() == n1_0 - sim.count(1));
    CHECK(sim.kills() == n2_0 - sim.count(2));
}

TEST_CASE("stationarity of half-filled exchange dynamics") {
    // K = 0, u = 1/2: the product measure is invariant, so the pairing with
    // the first cosine mode stays centered at zero
    const int N = 64;
    Torus t(1, N);
    auto cosphi = [](const double* r, int) { return std::cos(2 * 3.14159265358979323846 * r[0]); };
    const int reps = 64;
    double acc = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        Xoshiro256pp rng = replica_stream(2024, rep);
        DensityField u(t, 0.5);
        PairConfig c = sample_bernoulli_pair(u, u, rng);
        SimParams p = params_1d(N, 0.0, 31 + rep);
        KawasakiSim sim(c, p);
        sim.run(1.0, {1.0}, [&](double, const PairConfig& cc) {
            acc += empirical_pairing(cc, cosphi, 1);
        });
    }
    // var of a single pairing = chi * ||phi||^2 / N = 0.25 * 0.5 / 64
    double sd_mean = std::sqrt(0.25 * 0.5 / N / reps);
    CHECK(std::abs(acc / reps) < 4.0 * sd_mean);
}

TEST_CASE("occupation statistics at T = 1 match the product marginals") {
    // reversibility smoke test: single sites and adjacent pairs across
    // replicas stay Bernoulli(1/2) and independent
    const int N = 32, reps = 600;
    Torus t(1, N);
    long occ0 = 0, pair01 = 0;
    for (int rep = 0; rep < reps; ++rep) {
        Xoshiro256pp rng = replica_stream(555, rep);
        DensityField u(t, 0.5);
        PairConfig c = sample_bernoulli_pair(u, u, rng);
        KawasakiSim sim(c, params_1d(N, 0.0, 900 + rep));
        sim.run(1.0, {}, [](double, const PairConfig&) {});
        occ0 += sim.config().sigma1[0];
        pair01 += sim.config().sigma1[0] & sim.config().sigma1[1];
    }
    double p0 = static_cast<double>(occ0) / reps;
    double p01 = static_cast<double>(pair01) / reps;
    CHECK(std::abs(p0 - 0.5) < 3.0 * std::sqrt(0.25 / reps));
    CHECK(std::abs(p01 - 0.25) < 3.0 * std::sqrt(0.25 * 0.75 / reps) + 0.02);
}
