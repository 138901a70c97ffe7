#include "latseg/heat_kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace latseg {

namespace {
constexpr double kPi = 3.14159265358979323846;

// 1d spectral kernel over differences z = 0..N-1:
//   k1(z) = N^{-1} sum_k exp(-a * lam_k) cos(2 pi k z / N),
// lam_k = 2(1 - cos(2 pi k / N)), a = diffusivity * N^2 * t.
std::vector<double> kernel_1d(int N, double a) {
    std::vector<double> k1(N, 0.0);
    for (int z = 0; z < N; ++z) {
        double acc = 0.0;
        for (int kk = 0; kk < N; ++kk) {
            double lam = 2.0 * (1.0 - std::cos(2.0 * kPi * kk / N));
            acc += std::exp(-a * lam) * std::cos(2.0 * kPi * kk * z / N);
        }
        k1[z] = acc / N;
    }
    return k1;
}
} // namespace

double HeatKernel::p(long x, long y) const {
    long z = 0;
    for (int j = 0; j < torus.dim(); ++j) {
        int dzj = torus.coord(y, j) - torus.coord(x, j);
        if (dzj < 0) dzj += torus.side();
        z += static_cast<long>(dzj) * torus.stride(j);
    }
    return k[z];
}

HeatKernel heat_kernel(const Torus& torus, double t, double diffusivity) {
    if (t < 0.0) throw std::invalid_argument("heat_kernel: negative time");
    const int N = torus.side();
    const double a = diffusivity * static_cast<double>(N) * N * t;
    auto k1 = kernel_1d(N, a);
    HeatKernel hk{torus, t, diffusivity, std::vector<double>(torus.nsites(), 1.0)};
    for (long z = 0; z < torus.nsites(); ++z) {
        double val = 1.0;
        for (int j = 0; j < torus.dim(); ++j) val *= k1[torus.coord(z, j)];
        hk.k[z] = val;
    }
    return hk;
}

DensityField heat_evolve(const DensityField& u0, double t, double diffusivity) {
    HeatKernel hk = heat_kernel(u0.torus, t, diffusivity);
    DensityField out(u0.torus);
    for (long x = 0; x < u0.size(); ++x) {
        double acc = 0.0;
        for (long y = 0; y < u0.size(); ++y) acc += u0[y] * hk.p(x, y);
        out[x] = acc;
    }
    return out;
}

double heat_kernel_wrapped_1d(int N, double t, int z, double diffusivity) {
    const double s = diffusivity * static_cast<double>(N) * N * t;
    if (s == 0.0) return z % N == 0 ? 1.0 : 0.0;
    const double x = 2.0 * s;
    double acc = 0.0;
    // wrap until the Bessel tail is negligible
    for (int m = -64; m <= 64; ++m) {
        long n = std::labs(static_cast<long>(z) + static_cast<long>(m) * N);
        double term = std::exp(-x) * std::cyl_bessel_i(static_cast<double>(n), x);
        acc += term;
        if (m > 0 && term < 1e-18 && n > x) break;
    }
    return acc;
}

double kernel_gradient_ratio(const std::vector<double>& t_grid, const Torus& torus,
                             double c_probe, double diffusivity) {
    if (c_probe <= 0.0 || c_probe > 1.0)
        throw std::invalid_argument("kernel_gradient_ratio: c_probe must be in (0,1]");
    double worst = 0.0;
    for (double t : t_grid) {
        if (t <= 0.0) throw std::invalid_argument("kernel_gradient_ratio: t must be positive");
        HeatKernel hk = heat_kernel(torus, t, diffusivity);
        HeatKernel hc = heat_kernel(torus, c_probe * t, diffusivity);
        // translation invariance: fix x = 0, sweep y
        for (long y = 0; y < torus.nsites(); ++y) {
            for (int j = 0; j < torus.dim(); ++j) {
                // gradient in x at x = 0 along axis j
                double g = torus.side() * (hk.p(torus.shift(0, j, +1), y) - hk.p(0, y));
                double ratio = std::abs(g) * std::sqrt(t) / hc.p(0, y);
                if (ratio > worst) worst = ratio;
            }
        }
    }
    return worst;
}

} // namespace latseg
