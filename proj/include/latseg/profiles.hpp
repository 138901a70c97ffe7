#pragma once

#include <string>
#include <vector>

#include "latseg/field.hpp"
#include "latseg/kawasaki.hpp" // TestFn
#include "latseg/stefan.hpp"

namespace latseg {

/// Built-in smooth test functions on the unit torus, named for configs:
/// one, cos1, sin1, bump. cos1/sin1 are the first modes in r_1.
TestFn test_function(const std::string& name);
std::vector<std::string> test_function_names();

/// Parameters reported with a built profile: gradient envelope constant and
/// the certified bounds e^{-c1 K} <= u <= c2.
struct ProfileInfo {
    double c1 = 0.0;
    double c2 = 0.0;
    double C0 = 0.0; // |grad u(0)| <= C0 K
};

/// Named initial density pairs on the torus. All profiles respect a strictly
/// positive floor and a cap below 1, so the densities are admissible for the
/// fluctuation-field normalizations. Supported names:
///   constant   u1 = a, u2 = b
///   sine       0.5 + amp sin/cos of the first mode, opposite phases
///   twobump    complementary smooth bumps with floor
///   step       segregated halves softened over one lattice cell
struct PairProfile {
    DensityField u1, u2;
    ProfileInfo info;
};
PairProfile build_pair_profile(const std::string& name, const Torus& torus, double K,
                               double a = 0.5, double b = 0.5);
std::vector<std::string> pair_profile_names();

/// Signed initial data for the limit solver: wsine, wstep, wtwobump.
SignedField build_signed_profile(const std::string& name, const Torus& grid);
std::vector<std::string> signed_profile_names();

/// Macroscopic density pair evaluated at r in [0,1)^d; used to build
/// matched initial data across lattice sizes. Segregated smooth bumps.
double macro_u1(const double* r, int d);
double macro_u2(const double* r, int d);

} // namespace latseg
