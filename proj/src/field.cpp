#include "latseg/field.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace latseg {

double discrete_laplacian(const DensityField& u, long x) {
    const Torus& t = u.torus;
    double acc = 0.0;
    for (int j = 0; j < t.dim(); ++j) {
        acc += u[t.shift(x, j, -1)] - u[x];
        acc += u[t.shift(x, j, +1)] - u[x];
    }
    return acc;
}

void discrete_gradient(const DensityField& u, long x, double* out) {
    const Torus& t = u.torus;
    for (int j = 0; j < t.dim(); ++j)
        out[j] = t.side() * (u[t.shift(x, j, +1)] - u[x]);
}

void write_snapshot(const std::string& path, const DensityField& u, int species) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_snapshot: cannot open " + path);
    f << u.torus.dim() << "," << u.torus.side() << "," << species << "\n";
    char buf[40];
    for (long s = 0; s < u.size(); ++s) {
        std::snprintf(buf, sizeof buf, "%.17g", u[s]);
        f << s << "," << buf << "\n";
    }
}

DensityField read_snapshot(const std::string& path, int* species_out) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_snapshot: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("read_snapshot: empty file");
    int d = 0, N = 0, species = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%d", &d, &N, &species) != 3)
        throw std::runtime_error("read_snapshot: bad header: " + line);
    DensityField u{Torus(d, N)};
    long expect = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        long idx;
        double val;
        if (std::sscanf(line.c_str(), "%ld,%lf", &idx, &val) != 2)
            throw std::runtime_error("read_snapshot: bad line: " + line);
        if (idx != expect++) throw std::runtime_error("read_snapshot: indices out of order");
        u[idx] = val;
    }
    if (expect != u.size()) throw std::runtime_error("read_snapshot: wrong site count");
    if (species_out) *species_out = species;
    return u;
}

} // namespace latseg
