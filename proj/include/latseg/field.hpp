#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latseg/torus.hpp"

namespace latseg {

/// Real-valued field on the torus, one value per site.
struct DensityField {
    Torus torus;
    std::vector<double> v;

    DensityField(const Torus& t, double fill = 0.0) : torus(t), v(t.nsites(), fill) {}

    double& operator[](long s) { return v[s]; }
    double operator[](long s) const { return v[s]; }
    long size() const { return torus.nsites(); }
};

/// Two binary occupation fields on the torus. One byte per site.
struct PairConfig {
    Torus torus;
    std::vector<std::uint8_t> sigma1, sigma2;

    explicit PairConfig(const Torus& t)
        : torus(t), sigma1(t.nsites(), 0), sigma2(t.nsites(), 0) {}

    std::vector<std::uint8_t>& species(int i) { return i == 1 ? sigma1 : sigma2; }
    const std::vector<std::uint8_t>& species(int i) const { return i == 1 ? sigma1 : sigma2; }

    long count(int i) const {
        long n = 0;
        for (auto b : species(i)) n += b;
        return n;
    }
};

/// Sum over the 2d neighbors of (u(y) - u(x)). For N = 2 the coinciding
/// neighbors are counted twice, matching the ordered-pair sum of the
/// exchange generator.
double discrete_laplacian(const DensityField& u, long x);

/// Scaled forward difference, component j = N * (u(x + e_j) - u(x)).
void discrete_gradient(const DensityField& u, long x, double* out);

/// Field snapshot I/O. Format: header "d,N,species" then one line per site
/// "index,value" in index order. Values round-trip exactly.
void write_snapshot(const std::string& path, const DensityField& u, int species);
DensityField read_snapshot(const std::string& path, int* species_out = nullptr);

} // namespace latseg
