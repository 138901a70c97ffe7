// Command-line front end: microscopic simulation, density-system and
// limit-equation solvers, flow reports, oracle verification suites, and the
// multi-level convergence experiments.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "latseg/field.hpp"
#include "latseg/flow.hpp"
#include "latseg/harness.hpp"
#include "latseg/heat_kernel.hpp"
#include "latseg/hydro.hpp"
#include "latseg/kawasaki.hpp"
#include "latseg/master.hpp"
#include "latseg/profiles.hpp"
#include "latseg/stefan.hpp"

namespace fs = std::filesystem;
using namespace latseg;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int cmd_simulate(int d, int N, double d1, double d2, double K, double T, std::uint64_t seed,
                 long replicas, std::vector<double> observe_times, const std::string& phi_name,
                 const std::string& profile, const std::string& out_path) {
    if (observe_times.empty()) observe_times.push_back(T);
    std::sort(observe_times.begin(), observe_times.end());
    TestFn phi = test_function(phi_name);
    Torus torus(d, N);
    PairProfile prof = build_pair_profile(profile, torus, K);

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << "time,species,pairing_value,replica\n";

    struct Row {
        double t;
        int species;
        double value;
        long replica;
    };
    std::vector<std::vector<Row>> rows(replicas);
#pragma omp parallel for schedule(dynamic)
    for (long rep = 0; rep < replicas; ++rep) {
        Xoshiro256pp rng = replica_stream(seed, static_cast<std::uint64_t>(rep));
        PairConfig cfg = sample_bernoulli_pair(prof.u1, prof.u2, rng);
        SimParams sp;
        sp.d = d;
        sp.N = N;
        sp.d1 = d1;
        sp.d2 = d2;
        sp.K = K;
        sp.seed = 0;
        KawasakiSim sim(cfg, sp);
        sim.rng() = rng;
        sim.run(T, observe_times, [&](double t, const PairConfig& c) {
            for (int i = 1; i <= 2; ++i)
                rows[rep].push_back({t, i, empirical_pairing(c, phi, i), rep});
        });
    }
    for (const auto& rv : rows)
        for (const auto& r : rv)
            out << fmt(r.t) << "," << r.species << "," << fmt(r.value) << "," << r.replica
                << "\n";
    return 0;
}

int cmd_hydro(int d, int N, double d1, double d2, double K, double T,
              const std::string& profile, const std::string& out_dir,
              const std::vector<double>& output_times) {
    Torus torus(d, N);
    PairProfile prof = build_pair_profile(profile, torus, K);
    HydroState s0(torus);
    s0.u1 = prof.u1;
    s0.u2 = prof.u2;
    HydroParams hp{d1, d2, K};
    std::vector<double> outs = output_times;
    if (outs.empty())
        for (int k = 0; k <= 10; ++k) outs.push_back(T * k / 10.0);
    HydroRunStats stats;
    auto traj = hydro_integrate(s0, T, hp, DtControl{}, outs, &stats);

    fs::create_directories(out_dir);
    int idx = 0;
    for (const auto& s : traj) {
        for (int i = 1; i <= 2; ++i) {
            std::string path =
                out_dir + "/u" + std::to_string(i) + "_t" + std::to_string(idx) + ".snap";
            write_snapshot(path, i == 1 ? s.u1 : s.u2, i);
        }
        ++idx;
    }
    std::cout << "profile " << profile << ": c1=" << prof.info.c1 << " c2=" << prof.info.c2
              << " C0=" << prof.info.C0 << "\n";
    std::cout << "segregation_integral " << fmt(stats.seg_integral) << " bound "
              << fmt(1.0 / K) << "\n";
    std::cout << "gradient_l2_integral_1 " << fmt(stats.grad_integral[0]) << " bound "
              << fmt(1.0 / (2.0 * d1)) << "\n";
    std::cout << "gradient_l2_integral_2 " << fmt(stats.grad_integral[1]) << " bound "
              << fmt(1.0 / (2.0 * d2)) << "\n";
    bool ok = stats.seg_integral <= 1.0 / K + 1e-6 &&
              stats.grad_integral[0] <= 1.0 / (2.0 * d1) + 1e-6 &&
              stats.grad_integral[1] <= 1.0 / (2.0 * d2) + 1e-6;
    return ok ? 0 : 1;
}

int cmd_stefan(int d, int M, double d1, double d2, double T, const std::string& profile,
               const std::string& out_dir) {
    if (d != 1) throw std::runtime_error("stefan: d = 1 only in the CLI");
    Torus grid(1, M);
    StefanState s0(grid);
    s0.w = build_signed_profile(profile, grid);
    StefanParams sp{d1, d2};
    std::vector<double> outs;
    for (int k = 0; k <= 20; ++k) outs.push_back(T * k / 20.0);
    auto traj = stefan_integrate(s0, T, sp, DtControl{}, outs);

    fs::create_directories(out_dir);
    std::ofstream rep(out_dir + "/residuals.csv");
    rep << "psi_id,M,dt,residual\n";
    const double dt = stefan_stable_dt(grid, sp, DtControl{});
    for (int id = 0; id < weak_test_fn_count(); ++id) {
        double res = weak_residual(traj, sp, weak_test_fn(id, T, 1));
        rep << id << "," << M << "," << fmt(dt) << "," << fmt(res) << "\n";
    }
    int idx = 0;
    for (const auto& s : traj) {
        DensityField f(grid);
        for (long x = 0; x < grid.nsites(); ++x) f[x] = s.w[x];
        write_snapshot(out_dir + "/w_t" + std::to_string(idx++) + ".snap", f, 0);
    }
    auto crossings = interface_extract_1d(traj.back().w);
    for (const auto& c : crossings)
        std::cout << "crossing " << fmt(c.pos) << " s+ " << fmt(c.s_plus) << " s- "
                  << fmt(c.s_minus) << " flux_gap " << fmt(d1 * c.s_plus - d2 * c.s_minus)
                  << "\n";
    return 0;
}

int cmd_flow(int d, int ell, const std::string& report, const std::string& dump_path) {
    LatticeFlow f = build_flow(ell, d);
    if (report == "divergence") {
        std::cout << "divergence_defect " << fmt(f.divergence_defect()) << "\n";
    } else if (report == "energy") {
        double e = f.energy();
        std::cout << "energy " << fmt(e) << " energy_per_scale "
                  << fmt(e / flow_energy_scale(d, ell)) << "\n";
    } else {
        throw std::runtime_error("flow: report must be energy or divergence");
    }
    if (!dump_path.empty()) {
        std::ofstream out(dump_path);
        out << "x_index,direction,value\n";
        for (long x = 0; x < f.box_size(); ++x)
            for (int j = 0; j < d; ++j) {
                long c = (x / f.box_stride(j)) % f.dims[j];
                if (c + 1 >= f.dims[j]) continue;
                double v = f.edge_value(x, j);
                if (v != 0.0) out << x << "," << j << "," << fmt(v) << "\n";
            }
    }
    return 0;
}

int cmd_verify(const std::string& suite, int N, double K, std::uint64_t seed,
               const std::string& report_path) {
    std::ofstream rep(report_path);
    if (!rep) throw std::runtime_error("cannot open " + report_path);
    rep << "suite,instance_id,defect_or_margin,bound,pass\n";
    bool all_ok = true;
    auto emit = [&](const std::string& s, int id, double val, double bound, bool pass) {
        rep << s << "," << id << "," << fmt(val) << "," << fmt(bound) << ","
            << (pass ? 1 : 0) << "\n";
        all_ok = all_ok && pass;
    };
    Xoshiro256pp rng(seed);
    MasterParams mp;
    mp.N = N;
    mp.K = K;

    auto random_fields = [&](double lo, double hi) {
        DensityField u1{Torus(1, N)}, u2{Torus(1, N)};
        for (int x = 0; x < N; ++x) {
            u1[x] = lo + (hi - lo) * rng.uniform01();
            u2[x] = lo + (hi - lo) * rng.uniform01();
        }
        return std::pair{u1, u2};
    };

    if (suite == "adjoint") {
        Generator g = build_generator(mp);
        emit("adjoint", 0, g.max_abs_row_sum(), 1e-13, g.max_abs_row_sum() <= 1e-13);
        // stationarity of the constant-density product measure at K = 0
        MasterParams mp0 = mp;
        mp0.K = 0.0;
        Generator g0 = build_generator(mp0);
        DensityField u1{Torus(1, N)}, u2{Torus(1, N)};
        for (int x = 0; x < N; ++x) {
            u1[x] = 0.3;
            u2[x] = 0.6;
        }
        auto nu = product_weights(g0.space, u1, u2);
        std::vector<double> dnu(nu.size());
        g0.apply_forward(nu.data(), dnu.data());
        double worst = 0.0;
        for (double v : dnu) worst = std::max(worst, std::abs(v));
        emit("adjoint", 1, worst, 1e-13, worst <= 1e-13);
        // out-rates against the event simulator's independent bookkeeping
        SimParams sp;
        sp.d = 1;
        sp.N = N;
        sp.d1 = mp.d1;
        sp.d2 = mp.d2;
        sp.K = K;
        double rate_gap = 0.0;
        for (long s = 0; s < g.space.nstates(); ++s) {
            KawasakiSim sim(g.space.to_config(s), sp);
            rate_gap = std::max(rate_gap, std::abs(g.out_rate(s) - sim.total_rate()));
        }
        emit("adjoint", 2, rate_gap, 1e-10, rate_gap <= 1e-10);
    } else if (suite == "vdecomp") {
        for (int inst = 0; inst < 25; ++inst) {
            auto [u1, u2] = random_fields(0.15, 0.85);
            double defect = verify_V_decomposition(u1, u2, mp);
            emit("vdecomp", inst, defect, 1e-10, defect <= 1e-10);
        }
    } else if (suite == "entropy-ineq") {
        auto [u1, u2] = random_fields(0.3, 0.7);
        std::vector<double> times;
        for (int k = 1; k <= 50; ++k) times.push_back(0.02 * k);
        auto pts = verify_entropy_inequality(u1, u2, mp, times);
        int id = 0;
        for (const auto& p : pts) emit("entropy-ineq", id++, p.margin, -1e-6, p.margin >= -1e-6);
    } else if (suite == "ibp") {
        StateSpace sp(N);
        const double c2 = 0.8, c1 = 1.0;
        for (int inst = 0; inst < 50; ++inst) {
            double lo = std::exp(-c1 * K);
            auto [u1, u2] = random_fields(std::max(lo, 0.05), c2);
            int x = static_cast<int>(rng.uniform_index(N));
            int y = (x + 1) % N;
            std::vector<double> h(sp.nstates()), f(sp.nstates());
            for (long s = 0; s < sp.nstates(); ++s) h[s] = rng.uniform01() * 2.0 - 1.0;
            // make h swap-invariant across the bond
            for (long s = 0; s < sp.nstates(); ++s) {
                long sw = StateSpace::swap2(s, x, y);
                if (sw > s) h[sw] = h[s];
            }
            auto nu = product_weights(sp, u1, u2);
            double z = 0.0;
            for (long s = 0; s < sp.nstates(); ++s) {
                f[s] = 0.5 + rng.uniform01();
                z += f[s] * nu[s];
            }
            for (auto& v : f) v /= z;
            auto res = verify_ibp(sp, h, f, x, y, u1, u2, c1, c2, K);
            emit("ibp", inst, res.identity_defect, 1e-12,
                 res.identity_defect <= 1e-12 && res.within_bound);
        }
    } else if (suite == "ldp") {
        TestFn one = test_function("one");
        for (int k = 0; k < 3; ++k) {
            int n = 16 << k;
            DensityField u{Torus(1, n), 0.5};
            auto est = ldp_estimate(u, one, 0.2, 100000, seed + k, true);
            bool pass = est.exact >= 0 && est.ci.lo <= est.exact && est.exact <= est.ci.hi;
            emit("ldp", k, est.rate, est.exact > 0 ? -std::log(est.exact) / n : 0.0, pass);
        }
    } else if (suite == "concentration") {
        int id = 0;
        for (int n : {1, 4, 8, 12}) {
            std::vector<TwoPointVar> vars;
            for (int i = 0; i < n; ++i)
                vars.push_back({-rng.uniform01(), rng.uniform01(), 0.2 + 0.6 * rng.uniform01()});
            double kappa = 0.0;
            for (auto& v : vars) kappa += (v.b - v.a) * (v.b - v.a);
            for (double frac : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                auto res = concentration_exact(vars, frac / kappa);
                emit("concentration", id++, res.lhs, res.rhs, res.ok);
            }
        }
    } else {
        throw std::runtime_error("verify: unknown suite " + suite);
    }
    return all_ok ? 0 : 1;
}

int cmd_converge(const std::string& config_path, const std::string& out_dir) {
    Config cfg = Config::parse_file(config_path);
    cfg.validate(converge_config_registry());
    fs::create_directories(out_dir);
    {
        std::ofstream res(out_dir + "/config.resolved");
        res << cfg.dump();
    }
    std::string level = cfg.get("experiment", "level", "converge");
    if (level != "converge") throw std::runtime_error("converge: config level must be converge");
    std::string mode = cfg.get("experiment", "mode", "micro");

    std::ofstream rep(out_dir + "/report.csv");
    bool ok = true;
    if (mode == "micro") {
        MicroParams mp = micro_params_from_config(cfg);
        auto cells = converge_microscopic(mp);
        rep << "mode,N,K,time,species,replicas,exceed,p_hat,ci_lo,ci_hi,mean_gap\n";
        for (const auto& c : cells)
            rep << "micro," << c.N << "," << fmt(c.K) << "," << fmt(c.t) << "," << c.species
                << "," << c.replicas << "," << c.exceed << "," << fmt(c.p_hat) << ","
                << fmt(c.ci.lo) << "," << fmt(c.ci.hi) << "," << fmt(c.mean_gap) << "\n";
    } else if (mode == "macro") {
        MacroParams mp = macro_params_from_config(cfg);
        auto cells = converge_macroscopic(mp);
        rep << "mode,N,K,l2_dist,seg_integral,seg_bound,grad1,grad1_bound,grad2,grad2_bound,"
               "mass_gap,bounds_ok\n";
        for (const auto& c : cells) {
            rep << "macro," << c.N << "," << fmt(c.K) << "," << fmt(c.l2_dist) << ","
                << fmt(c.seg_integral) << "," << fmt(c.seg_bound) << ","
                << fmt(c.grad_integral[0]) << "," << fmt(c.grad_bound[0]) << ","
                << fmt(c.grad_integral[1]) << "," << fmt(c.grad_bound[1]) << ","
                << fmt(c.mass_gap) << "," << (c.bounds_ok ? 1 : 0) << "\n";
            ok = ok && c.bounds_ok;
        }
    } else {
        throw std::runtime_error("converge: mode must be micro or macro");
    }
    return ok ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-species exchange dynamics with annihilation: simulators and checks"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "event-driven microscopic simulation");
    int d = 1, N = 64;
    double d1 = 1.0, d2 = 1.0, K = 1.0, T = 0.1;
    std::uint64_t seed = 1;
    long replicas = 1;
    std::vector<double> times;
    std::string phi = "cos1", profile = "sine", out = "observers.csv";
    sim->add_option("--d", d);
    sim->add_option("--N", N);
    sim->add_option("--d1", d1);
    sim->add_option("--d2", d2);
    sim->add_option("--K", K);
    sim->add_option("--T", T);
    sim->add_option("--seed", seed);
    sim->add_option("--replicas", replicas);
    sim->add_option("--observe-times", times)->delimiter(',');
    sim->add_option("--phi", phi);
    sim->add_option("--profile", profile);
    sim->add_option("--out", out);

    // hydro
    auto* hyd = app.add_subcommand("hydro", "discrete reaction-diffusion solver");
    int hN = 64;
    double hd1 = 1.0, hd2 = 1.0, hK = 1.0, hT = 0.1;
    int hd = 1;
    std::string hprofile = "twobump", hout = "hydro_out";
    std::vector<double> houts;
    hyd->add_option("--d", hd);
    hyd->add_option("--N", hN);
    hyd->add_option("--d1", hd1);
    hyd->add_option("--d2", hd2);
    hyd->add_option("--K", hK);
    hyd->add_option("--T", hT);
    hyd->add_option("--profile", hprofile);
    hyd->add_option("--out", hout);
    hyd->add_option("--output-times", houts)->delimiter(',');

    // stefan
    auto* ste = app.add_subcommand("stefan", "two-phase limit equation solver");
    int sd = 1, M = 128;
    double sd1 = 1.0, sd2 = 2.0, sT = 0.1;
    std::string sprofile = "wstep", sout = "stefan_out";
    ste->add_option("--d", sd);
    ste->add_option("--M", M);
    ste->add_option("--d1", sd1);
    ste->add_option("--d2", sd2);
    ste->add_option("--T", sT);
    ste->add_option("--profile", sprofile);
    ste->add_option("--out", sout);

    // flow
    auto* flo = app.add_subcommand("flow", "averaging-kernel flow reports");
    int fd = 1, fell = 8;
    std::string freport = "divergence", fdump;
    flo->add_option("--d", fd);
    flo->add_option("--ell", fell);
    flo->add_option("--report", freport);
    flo->add_option("--dump", fdump);

    // verify
    auto* ver = app.add_subcommand("verify", "exact oracle suites on tiny lattices");
    std::string suite = "vdecomp", vreport = "verify.csv";
    int vN = 4;
    double vK = 1.0;
    std::uint64_t vseed = 1;
    ver->add_option("--suite", suite);
    ver->add_option("--N", vN);
    ver->add_option("--K", vK);
    ver->add_option("--seed", vseed);
    ver->add_option("--report", vreport);

    // converge
    auto* con = app.add_subcommand("converge", "multi-level convergence experiments");
    std::string cconfig, cout_dir = "converge_out";
    con->add_option("--config", cconfig)->required();
    con->add_option("--out", cout_dir);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(d, N, d1, d2, K, T, seed, replicas, times, phi, profile, out);
        if (hyd->parsed()) return cmd_hydro(hd, hN, hd1, hd2, hK, hT, hprofile, hout, houts);
        if (ste->parsed()) return cmd_stefan(sd, M, sd1, sd2, sT, sprofile, sout);
        if (flo->parsed()) return cmd_flow(fd, fell, freport, fdump);
        if (ver->parsed()) return cmd_verify(suite, vN, vK, vseed, vreport);
        if (con->parsed()) return cmd_converge(cconfig, cout_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
