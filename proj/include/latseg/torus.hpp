#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace latseg {

/// Periodic lattice {0,...,N-1}^d with wraparound arithmetic.
/// Sites are addressed by a row-major linear index (last coordinate fastest).
class Torus {
public:
    Torus(int d, int N) : d_(d), N_(N) {
        if (d < 1 || d > 3) throw std::invalid_argument("Torus: dimension must be 1..3");
        if (N < 2) throw std::invalid_argument("Torus: side length must be >= 2");
        nsites_ = 1;
        for (int j = 0; j < d; ++j) nsites_ *= N;
        // stride[j] = N^(d-1-j), so coordinate d-1 is contiguous
        stride_[d - 1] = 1;
        for (int j = d - 2; j >= 0; --j) stride_[j] = stride_[j + 1] * N;
    }

    int dim() const { return d_; }
    int side() const { return N_; }
    long nsites() const { return nsites_; }
    long stride(int axis) const { return stride_[axis]; }

    long index(const std::array<int, 3>& c) const {
        long s = 0;
        for (int j = 0; j < d_; ++j) s += static_cast<long>(c[j]) * stride_[j];
        return s;
    }

    std::array<int, 3> coords(long s) const {
        std::array<int, 3> c{0, 0, 0};
        for (int j = 0; j < d_; ++j) c[j] = static_cast<int>((s / stride_[j]) % N_);
        return c;
    }

    int coord(long s, int axis) const { return static_cast<int>((s / stride_[axis]) % N_); }

    /// Site shifted by delta along an axis, with wraparound. |delta| may exceed N.
    long shift(long s, int axis, int delta) const {
        int c = coord(s, axis);
        int cn = (c + delta) % N_;
        if (cn < 0) cn += N_;
        return s + static_cast<long>(cn - c) * stride_[axis];
    }

    /// The 2d neighbors of a site, listed per axis as (x - e_j, x + e_j).
    /// For N = 2 the two entries of an axis coincide; both are listed.
    void neighbors(long s, long* out) const {
        for (int j = 0; j < d_; ++j) {
            out[2 * j] = shift(s, j, -1);
            out[2 * j + 1] = shift(s, j, +1);
        }
    }

    bool operator==(const Torus& o) const { return d_ == o.d_ && N_ == o.N_; }

private:
    int d_;
    int N_;
    long nsites_;
    std::array<long, 3> stride_{1, 1, 1};
};

} // namespace latseg
