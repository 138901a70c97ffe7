#pragma once

#include <array>
#include <vector>

namespace latseg {

/// Unnormalized DCT-II in place: x[k] <- sum_i x[i] cos(pi (2i+1) k / (2n)).
/// Power-of-two sizes go through a cached-plan FFT; other sizes fall back
/// to the direct O(n^2) sum.
void dct2(std::vector<double>& x);

/// Exact inverse of dct2 (including all normalization).
void dct2_inverse(std::vector<double>& x);

/// Solve the no-flux (Neumann) box Laplacian problem Lap(phi) = rhs with
/// sum(phi) = 0, in place. rhs must sum to zero. The Laplacian is the graph
/// Laplacian of the box lattice: sum over in-box neighbors of
/// (phi(y) - phi(x)). Spectrally exact via DCT-II per axis.
void neumann_poisson(std::vector<double>& a, const std::array<int, 3>& dims, int d);

} // namespace latseg
