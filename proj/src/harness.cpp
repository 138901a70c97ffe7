#include "latseg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "latseg/profiles.hpp"

namespace latseg {

double k_schedule(const std::string& kind, double delta, double K_fixed, int N) {
    if (kind == "fixed") return K_fixed;
    if (kind == "delta_sqrt_log") return std::max(1.0, delta * std::sqrt(std::log(static_cast<double>(N))));
    throw std::invalid_argument("k_schedule: unknown kind " + kind);
}

double embed_step_eval(const DensityField& u, const double* r) {
    const Torus& t = u.torus;
    const int N = t.side();
    std::array<int, 3> c{0, 0, 0};
    for (int j = 0; j < t.dim(); ++j) {
        double rj = r[j] - std::floor(r[j]); // wrap into [0,1)
        int x = static_cast<int>(std::floor(rj * N + 0.5));
        c[j] = x % N;
    }
    return u[t.index(c)];
}

double field_pairing(const DensityField& u, const TestFn& phi) {
    const Torus& t = u.torus;
    double r[3];
    KahanSum acc;
    for (long s = 0; s < t.nsites(); ++s) {
        auto c = t.coords(s);
        for (int j = 0; j < t.dim(); ++j) r[j] = static_cast<double>(c[j]) / t.side();
        acc.add(u[s] * phi(r, t.dim()));
    }
    return acc.value() / static_cast<double>(t.nsites());
}

namespace {
double mean_product(const HydroState& s) {
    KahanSum acc;
    for (long x = 0; x < s.u1.size(); ++x) acc.add(s.u1[x] * s.u2[x]);
    return acc.value() / static_cast<double>(s.u1.size());
}

double mean_grad_sq(const HydroState& s, int species) {
    const DensityField& u = species == 1 ? s.u1 : s.u2;
    double g[3];
    KahanSum acc;
    for (long x = 0; x < u.size(); ++x) {
        discrete_gradient(u, x, g);
        for (int j = 0; j < u.torus.dim(); ++j) acc.add(g[j] * g[j]);
    }
    return acc.value() / static_cast<double>(u.size());
}
} // namespace

double segregation_integral(const std::vector<HydroState>& traj) {
    double acc = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i)
        acc += 0.5 * (mean_product(traj[i - 1]) + mean_product(traj[i])) *
               (traj[i].t - traj[i - 1].t);
    return acc;
}

double gradient_l2_integral(const std::vector<HydroState>& traj, int species) {
    double acc = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i)
        acc += 0.5 * (mean_grad_sq(traj[i - 1], species) + mean_grad_sq(traj[i], species)) *
               (traj[i].t - traj[i - 1].t);
    return acc;
}

// ---------------------------------------------------------------------------
// micro -> meso

std::vector<MicroCell> converge_microscopic(const MicroParams& mp) {
    TestFn phi = test_function(mp.phi);
    std::vector<MicroCell> cells;

    for (int N : mp.N_list) {
        const double K = k_schedule(mp.schedule, mp.delta, mp.K_fixed, N);
        const Torus torus(mp.d, N);
        PairProfile prof = build_pair_profile(mp.profile, torus, K, mp.a, mp.b);

        // density-system prediction at the observer times
        HydroState h0(torus);
        h0.u1 = prof.u1;
        h0.u2 = prof.u2;
        HydroParams hp{mp.d1, mp.d2, K};
        double T = mp.times.empty() ? 0.0 : *std::max_element(mp.times.begin(), mp.times.end());
        auto traj = hydro_integrate(h0, T, hp, DtControl{}, mp.times);
        std::map<double, std::array<double, 2>> predicted;
        for (const auto& s : traj)
            predicted[s.t] = {field_pairing(s.u1, phi), field_pairing(s.u2, phi)};

        // replica sweep; per-replica gaps collected densely, merged after
        const long R = mp.replicas;
        const std::size_t nt = mp.times.size();
        std::vector<double> gaps(R * nt * 2);
        std::uint64_t seed_n = mp.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(N));

#pragma omp parallel for schedule(dynamic)
        for (long rep = 0; rep < R; ++rep) {
            Xoshiro256pp rng = replica_stream(seed_n, static_cast<std::uint64_t>(rep));
            PairConfig cfg = sample_bernoulli_pair(prof.u1, prof.u2, rng);
            SimParams sp;
            sp.d = mp.d;
            sp.N = N;
            sp.d1 = mp.d1;
            sp.d2 = mp.d2;
            sp.K = K;
            sp.seed = 0;
            KawasakiSim sim(cfg, sp);
            sim.rng() = rng; // continue the replica stream into the dynamics
            std::size_t ti = 0;
            sim.run(T, mp.times, [&](double t, const PairConfig& c) {
                for (int i = 1; i <= 2; ++i) {
                    double pairing = empirical_pairing(c, phi, i);
                    double pred = predicted.at(t)[i - 1];
                    gaps[(rep * nt + ti) * 2 + (i - 1)] = std::abs(pairing - pred);
                }
                ++ti;
            });
        }

        for (std::size_t ti = 0; ti < nt; ++ti)
            for (int i = 1; i <= 2; ++i) {
                MicroCell cell;
                cell.N = N;
                cell.K = K;
                cell.t = mp.times[ti];
                cell.species = i;
                cell.replicas = R;
                KahanSum mean;
                for (long rep = 0; rep < R; ++rep) {
                    double gap = gaps[(rep * nt + ti) * 2 + (i - 1)];
                    mean.add(gap);
                    if (gap > mp.eps) ++cell.exceed;
                }
                cell.mean_gap = mean.value() / R;
                cell.p_hat = static_cast<double>(cell.exceed) / R;
                cell.ci = clopper_pearson(cell.exceed, R);
                cells.push_back(cell);
            }
    }
    return cells;
}

// ---------------------------------------------------------------------------
// meso -> macro

double step_l2_distance_1d(const DensityField& a, const DensityField& b) {
    const int Na = a.torus.side(), Nb = b.torus.side();
    const long L = 2L * std::lcm(static_cast<long>(Na), static_cast<long>(Nb));
    double r;
    KahanSum acc;
    for (long i = 0; i < L; ++i) {
        r = (i + 0.5) / static_cast<double>(L);
        double diff = embed_step_eval(a, &r) - embed_step_eval(b, &r);
        acc.add(diff * diff);
    }
    return acc.value() / static_cast<double>(L);
}

std::vector<MacroCell> converge_macroscopic(const MacroParams& mp) {
    if (mp.d != 1) throw std::invalid_argument("converge_macroscopic: d = 1 only");
    const bool positive = mp.datum == "positive";
    if (!positive && mp.datum != "twophase")
        throw std::invalid_argument("converge_macroscopic: datum must be twophase or positive");
    auto datum_u1 = [&](double r) { return positive ? 0.35 + 0.3 * macro_u1(&r, 1) : macro_u1(&r, 1); };
    auto datum_u2 = [&](double r) { return positive ? 0.0 : macro_u2(&r, 1); };
    std::vector<double> times;
    for (int k = 0; k < mp.n_times; ++k) times.push_back(mp.T * k / (mp.n_times - 1));

    // limit-solver reference on the fine grid
    Torus ref_grid(1, mp.M_ref);
    StefanState ref0(ref_grid);
    for (long x = 0; x < ref_grid.nsites(); ++x) {
        double r = static_cast<double>(x) / mp.M_ref;
        ref0.w[x] = datum_u1(r) - datum_u2(r);
    }
    StefanParams stp{mp.d1, mp.d2};
    auto ref_traj = stefan_integrate(ref0, mp.T, stp, DtControl{}, times);
    double ref_mass = kahan_total(ref_traj.back().w.w) / mp.M_ref;

    std::vector<MacroCell> cells;
    for (int N : mp.N_list) {
        const double K = k_schedule(mp.schedule, mp.delta, mp.K_fixed, N);
        const Torus torus(1, N);
        HydroState h0(torus);
        const double floor_val = std::exp(-2.0 * K);
        for (long x = 0; x < torus.nsites(); ++x) {
            double r = static_cast<double>(x) / N;
            // the same floor on both species keeps u1 - u2 equal to the
            // signed macroscopic datum exactly
            h0.u1[x] = datum_u1(r) + floor_val;
            h0.u2[x] = datum_u2(r) + floor_val;
        }
        HydroParams hp{mp.d1, mp.d2, K};
        HydroRunStats stats;
        auto traj = hydro_integrate(h0, mp.T, hp, DtControl{}, times, &stats);

        MacroCell cell;
        cell.N = N;
        cell.K = K;
        cell.seg_integral = stats.seg_integral;
        cell.seg_bound = 1.0 / K + 1e-6;
        for (int i = 0; i < 2; ++i) {
            cell.grad_integral[i] = stats.grad_integral[i];
            cell.grad_bound[i] = 1.0 / (2.0 * (i == 0 ? mp.d1 : mp.d2)) + 1e-6;
        }
        cell.bounds_ok = cell.seg_integral <= cell.seg_bound &&
                         cell.grad_integral[0] <= cell.grad_bound[0] &&
                         cell.grad_integral[1] <= cell.grad_bound[1];

        // L2([0,T] x torus) distance of u1 - u2 against the reference
        std::vector<double> sq(times.size());
        for (std::size_t k = 0; k < times.size(); ++k) {
            DensityField wN(torus);
            for (long x = 0; x < torus.nsites(); ++x) wN[x] = traj[k].u1[x] - traj[k].u2[x];
            DensityField wR(ref_grid);
            for (long x = 0; x < ref_grid.nsites(); ++x) wR[x] = ref_traj[k].w[x];
            sq[k] = step_l2_distance_1d(wN, wR);
        }
        double time_int = 0.0;
        for (std::size_t k = 1; k < times.size(); ++k)
            time_int += 0.5 * (sq[k - 1] + sq[k]) * (times[k] - times[k - 1]);
        cell.l2_dist = std::sqrt(time_int);

        double mass = 0.0;
        {
            KahanSum acc;
            for (long x = 0; x < torus.nsites(); ++x)
                acc.add(traj.back().u1[x] - traj.back().u2[x]);
            mass = acc.value() / N;
        }
        cell.mass_gap = std::abs(mass - ref_mass);
        cells.push_back(cell);
    }
    return cells;
}

// ---------------------------------------------------------------------------
// config

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto notspace = [](unsigned char c) { return !std::isspace(c); };
        line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
        line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": malformed section header");
            section = line.substr(1, line.size() - 2);
            cfg.data_[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        auto strip = [&](std::string& s) {
            s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
            s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
        };
        strip(key);
        strip(val);
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": key outside any section");
        if (cfg.data_[section].count(key))
            throw std::invalid_argument("config: duplicate key " + section + "." + key);
        cfg.data_[section][key] = val;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_string(ss.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = data_.find(section);
    return it != data_.end() && it->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
    auto it = data_.find(section);
    if (it == data_.end()) return fallback;
    auto kt = it->second.find(key);
    return kt == it->second.end() ? fallback : kt->second;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    if (!has(section, key)) return fallback;
    return std::stod(get(section, key, ""));
}

long Config::get_long(const std::string& section, const std::string& key, long fallback) const {
    if (!has(section, key)) return fallback;
    return std::stol(get(section, key, ""));
}

namespace {
std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}
} // namespace

std::vector<int> Config::get_int_list(const std::string& section, const std::string& key,
                                      const std::vector<int>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<int> out;
    for (const auto& tok : split_csv(get(section, key, ""))) out.push_back(std::stoi(tok));
    return out;
}

std::vector<double> Config::get_double_list(const std::string& section, const std::string& key,
                                            const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<double> out;
    for (const auto& tok : split_csv(get(section, key, ""))) out.push_back(std::stod(tok));
    return out;
}

void Config::validate(const std::map<std::string, std::vector<std::string>>& registry) const {
    std::string errors;
    for (const auto& [section, kv] : data_) {
        auto rt = registry.find(section);
        if (rt == registry.end()) {
            errors += "unknown section [" + section + "]\n";
            continue;
        }
        for (const auto& [key, val] : kv)
            if (std::find(rt->second.begin(), rt->second.end(), key) == rt->second.end())
                errors += "unknown key " + section + "." + key + "\n";
    }
    if (!errors.empty()) throw std::invalid_argument("config validation failed:\n" + errors);
}

std::string Config::dump() const {
    std::ostringstream out;
    for (const auto& [section, kv] : data_) {
        out << "[" << section << "]\n";
        for (const auto& [key, val] : kv) out << key << " = " << val << "\n";
    }
    return out.str();
}

std::map<std::string, std::vector<std::string>> converge_config_registry() {
    return {
        {"experiment", {"level", "mode", "seed"}},
        {"sweep", {"N_list", "K_schedule", "delta", "K_fixed"}},
        {"sim",
         {"d", "d1", "d2", "replicas", "epsilon", "phi", "profile", "a", "b", "T",
          "observe_times"}},
        {"macro", {"M_ref", "T", "n_times", "d1", "d2", "datum"}},
    };
}

MicroParams micro_params_from_config(const Config& cfg) {
    MicroParams mp;
    mp.d = static_cast<int>(cfg.get_long("sim", "d", 1));
    mp.N_list = cfg.get_int_list("sweep", "N_list", mp.N_list);
    mp.d1 = cfg.get_double("sim", "d1", 1.0);
    mp.d2 = cfg.get_double("sim", "d2", 1.0);
    mp.schedule = cfg.get("sweep", "K_schedule", "delta_sqrt_log");
    mp.delta = cfg.get_double("sweep", "delta", 1.0);
    mp.K_fixed = cfg.get_double("sweep", "K_fixed", 1.0);
    mp.times = cfg.get_double_list("sim", "observe_times", mp.times);
    mp.replicas = cfg.get_long("sim", "replicas", 200);
    mp.eps = cfg.get_double("sim", "epsilon", 0.05);
    mp.phi = cfg.get("sim", "phi", "cos1");
    mp.profile = cfg.get("sim", "profile", "sine");
    mp.a = cfg.get_double("sim", "a", 0.5);
    mp.b = cfg.get_double("sim", "b", 0.5);
    mp.seed = static_cast<std::uint64_t>(cfg.get_long("experiment", "seed", 1));
    return mp;
}

MacroParams macro_params_from_config(const Config& cfg) {
    MacroParams mp;
    mp.N_list = cfg.get_int_list("sweep", "N_list", mp.N_list);
    mp.M_ref = static_cast<int>(cfg.get_long("macro", "M_ref", 1024));
    mp.d1 = cfg.get_double("macro", "d1", 1.0);
    mp.d2 = cfg.get_double("macro", "d2", 2.0);
    mp.schedule = cfg.get("sweep", "K_schedule", "delta_sqrt_log");
    mp.delta = cfg.get_double("sweep", "delta", 1.0);
    mp.K_fixed = cfg.get_double("sweep", "K_fixed", 1.0);
    mp.T = cfg.get_double("macro", "T", 0.1);
    mp.n_times = static_cast<int>(cfg.get_long("macro", "n_times", 21));
    mp.datum = cfg.get("macro", "datum", "twophase");
    return mp;
}

} // namespace latseg
