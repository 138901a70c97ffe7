#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "latseg/hydro.hpp"
#include "latseg/kawasaki.hpp"
#include "latseg/stats.hpp"
#include "latseg/stefan.hpp"

namespace latseg {

/// K(N) driver: "fixed" returns K_fixed, "delta_sqrt_log" returns
/// max(1, delta sqrt(log N)).
double k_schedule(const std::string& kind, double delta, double K_fixed, int N);

/// Step-function embedding of a lattice field into the unit torus: the value
/// at r is u(x) for the unique x with r in the half-open box of side 1/N
/// centered at x/N.
double embed_step_eval(const DensityField& u, const double* r);

/// Lattice Riemann pairing N^{-d} sum_x u(x) phi(x/N).
double field_pairing(const DensityField& u, const TestFn& phi);

/// Trapezoid-in-time integrals over a stored trajectory (diagnostics; the
/// asserted bounds use the in-run accumulators of hydro_integrate).
double segregation_integral(const std::vector<HydroState>& traj);
double gradient_l2_integral(const std::vector<HydroState>& traj, int species);

// ---------------------------------------------------------------------------
// micro -> meso experiment

struct MicroParams {
    int d = 1;
    std::vector<int> N_list{64, 128, 256};
    double d1 = 1.0, d2 = 1.0;
    std::string schedule = "delta_sqrt_log";
    double delta = 1.0;
    double K_fixed = 1.0;
    std::vector<double> times{0.05, 0.1};
    long replicas = 200;
    double eps = 0.05;
    std::string phi = "cos1";
    std::string profile = "sine";
    double a = 0.5, b = 0.5;
    std::uint64_t seed = 1;
};

struct MicroCell {
    int N = 0;
    double K = 0.0;
    double t = 0.0;
    int species = 1;
    long exceed = 0;
    long replicas = 0;
    double p_hat = 0.0;
    ConfidenceInterval ci;
    double mean_gap = 0.0;
};

/// For each N: sample replicas from the product measure of the profile,
/// run the exchange-annihilation dynamics, and compare empirical pairings
/// with the density-system prediction at the observer times.
std::vector<MicroCell> converge_microscopic(const MicroParams& mp);

// ---------------------------------------------------------------------------
// meso -> macro experiment

struct MacroParams {
    int d = 1;
    std::vector<int> N_list{64, 128, 256, 512};
    int M_ref = 1024;
    double d1 = 1.0, d2 = 2.0;
    std::string schedule = "delta_sqrt_log";
    double delta = 1.0;
    double K_fixed = 1.0;
    double T = 0.1;
    int n_times = 21;
    std::string datum = "twophase"; // or "positive": sign-definite, species 2 at floor
};

struct MacroCell {
    int N = 0;
    double K = 0.0;
    double l2_dist = 0.0; // || (u1 - u2) - w_ref ||_{L2([0,T] x torus)}
    double seg_integral = 0.0, seg_bound = 0.0;
    double grad_integral[2] = {0, 0}, grad_bound[2] = {0, 0};
    double mass_gap = 0.0; // |w-mass(hydro) - w-mass(reference)|
    bool bounds_ok = false;
};

/// Matched macroscopic data across the N sweep against the limit-solver
/// reference on the fine grid; densities get a strictly positive floor on
/// both species so the species difference equals the signed datum exactly.
std::vector<MacroCell> converge_macroscopic(const MacroParams& mp);

/// Exact L2 distance between two step functions given by lattice fields on
/// (possibly different) d = 1 grids, integrated over the common refinement.
double step_l2_distance_1d(const DensityField& a, const DensityField& b);

// ---------------------------------------------------------------------------
// strict flat config files

/// Sections of key = value lines; '#' starts a comment. Unknown sections or
/// keys are errors, caught against the registry at parse time.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long get_long(const std::string& section, const std::string& key, long fallback) const;
    std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                  const std::vector<int>& fallback) const;
    std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const;

    /// Throws listing every unknown section/key pair.
    void validate(const std::map<std::string, std::vector<std::string>>& registry) const;

    /// Canonical flat dump (sorted), used for the resolved-config artifact.
    std::string dump() const;

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

/// Registry of every key the converge tool understands.
std::map<std::string, std::vector<std::string>> converge_config_registry();

MicroParams micro_params_from_config(const Config& cfg);
MacroParams macro_params_from_config(const Config& cfg);

} // namespace latseg
