#pragma once

#include <vector>

#include "latseg/field.hpp"

namespace latseg {

/// Transition density of the semigroup generated by diffusivity * N^2 * Lap
/// on the torus, tabulated over difference vectors z = y - x. Computed by
/// the exact spectral sum; separable across axes.
struct HeatKernel {
    Torus torus;
    double t;
    double diffusivity;
    std::vector<double> k; // indexed by the difference site z

    double p(long x, long y) const;
};

HeatKernel heat_kernel(const Torus& torus, double t, double diffusivity = 1.0);

/// Kernel-evolved field: sum_y u0(y) p(t, x, y).
DensityField heat_evolve(const DensityField& u0, double t, double diffusivity = 1.0);

/// d = 1 wrapped-line kernel sum_m exp(-2s) I_{|z+mN|}(2s) at s = N^2 t,
/// used as an independent cross-check of the spectral route.
double heat_kernel_wrapped_1d(int N, double t, int z, double diffusivity = 1.0);

/// sup over the t-grid, x, y of |grad p(t,x,y)| sqrt(t) / p(c t, x, y).
/// Finiteness of the returned constant backs the kernel gradient bound.
double kernel_gradient_ratio(const std::vector<double>& t_grid, const Torus& torus,
                             double c_probe, double diffusivity = 1.0);

} // namespace latseg
