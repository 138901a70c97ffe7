#include "latseg/dct.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace latseg {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(int n) { return n >= 2 && (n & (n - 1)) == 0; }

struct FftPlan {
    int n;
    std::vector<int> rev;           // bit-reversal permutation
    std::vector<double> wr, wi;     // roots exp(-2 pi i j / n), j < n/2
    std::vector<double> qr, qi;     // quarter phases exp(-i pi k / (2n)), k < n
};

const FftPlan& fft_plan(int n) {
    static std::map<int, std::unique_ptr<FftPlan>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return *it->second;
    auto plan = std::make_unique<FftPlan>();
    plan->n = n;
    plan->rev.resize(n);
    int lg = 0;
    while ((1 << lg) < n) ++lg;
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < lg; ++b)
            if (i & (1 << b)) r |= 1 << (lg - 1 - b);
        plan->rev[i] = r;
    }
    plan->wr.resize(n / 2);
    plan->wi.resize(n / 2);
    for (int j = 0; j < n / 2; ++j) {
        plan->wr[j] = std::cos(2.0 * kPi * j / n);
        plan->wi[j] = -std::sin(2.0 * kPi * j / n);
    }
    plan->qr.resize(n);
    plan->qi.resize(n);
    for (int k = 0; k < n; ++k) {
        plan->qr[k] = std::cos(kPi * k / (2.0 * n));
        plan->qi[k] = -std::sin(kPi * k / (2.0 * n));
    }
    const FftPlan& ref = *plan;
    cache.emplace(n, std::move(plan));
    return ref;
}

void fft_inplace(double* re, double* im, const FftPlan& p, bool inverse) {
    const int n = p.n;
    for (int i = 0; i < n; ++i) {
        int r = p.rev[i];
        if (i < r) {
            std::swap(re[i], re[r]);
            std::swap(im[i], im[r]);
        }
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len >> 1;
        const int step = n / len;
        for (int i = 0; i < n; i += len) {
            for (int j = 0; j < half; ++j) {
                double wr = p.wr[j * step];
                double wi = inverse ? -p.wi[j * step] : p.wi[j * step];
                double& ar = re[i + j];
                double& ai = im[i + j];
                double& br = re[i + j + half];
                double& bi = im[i + j + half];
                double tr = br * wr - bi * wi;
                double ti = br * wi + bi * wr;
                br = ar - tr;
                bi = ai - ti;
                ar += tr;
                ai += ti;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / n;
        for (int i = 0; i < n; ++i) {
            re[i] *= inv;
            im[i] *= inv;
        }
    }
}

void dct2_naive(std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<double> out(n, 0.0);
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += x[i] * std::cos(kPi * (2 * i + 1) * k / (2.0 * n));
        out[k] = acc;
    }
    x.swap(out);
}

void dct2_inverse_naive(std::vector<double>& c) {
    const int n = static_cast<int>(c.size());
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = c[0];
        for (int k = 1; k < n; ++k)
            acc += 2.0 * c[k] * std::cos(kPi * (2 * i + 1) * k / (2.0 * n));
        out[i] = acc / n;
    }
    c.swap(out);
}

} // namespace

void dct2(std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    if (n == 1) return;
    if (!is_pow2(n)) {
        dct2_naive(x);
        return;
    }
    const FftPlan& p = fft_plan(n);
    // even-odd fold (Makhoul): v[i] = x[2i], v[n-1-i] = x[2i+1]
    std::vector<double> re(n), im(n, 0.0);
    for (int i = 0; i < n / 2; ++i) {
        re[i] = x[2 * i];
        re[n - 1 - i] = x[2 * i + 1];
    }
    fft_inplace(re.data(), im.data(), p, false);
    for (int k = 0; k < n; ++k) x[k] = re[k] * p.qr[k] - im[k] * p.qi[k];
}

void dct2_inverse(std::vector<double>& c) {
    const int n = static_cast<int>(c.size());
    if (n == 1) return;
    if (!is_pow2(n)) {
        dct2_inverse_naive(c);
        return;
    }
    const FftPlan& p = fft_plan(n);
    // rebuild V[k] = exp(+i pi k/(2n)) (C[k] - i C[n-k]), V[0] = C[0]
    std::vector<double> re(n), im(n);
    re[0] = c[0];
    im[0] = 0.0;
    for (int k = 1; k < n; ++k) {
        double ar = c[k], ai = -c[n - k];
        // conj of the plan phase = exp(+i pi k/(2n))
        double pr = p.qr[k], pi_ = -p.qi[k];
        re[k] = ar * pr - ai * pi_;
        im[k] = ar * pi_ + ai * pr;
    }
    fft_inplace(re.data(), im.data(), p, true);
    for (int i = 0; i < n / 2; ++i) {
        c[2 * i] = re[i];
        c[2 * i + 1] = re[n - 1 - i];
    }
}

void neumann_poisson(std::vector<double>& a, const std::array<int, 3>& dims, int d) {
    long total = 1;
    for (int j = 0; j < d; ++j) total *= dims[j];
    if (static_cast<long>(a.size()) != total)
        throw std::invalid_argument("neumann_poisson: size mismatch");

    std::array<long, 3> stride{0, 0, 0};
    stride[d - 1] = 1;
    for (int j = d - 2; j >= 0; --j) stride[j] = stride[j + 1] * dims[j + 1];

    auto transform_axis = [&](int axis, bool inverse) {
        const int n = dims[axis];
        const long st = stride[axis];
        const long nlines = total / n;
#pragma omp parallel
        {
            std::vector<double> line(n);
#pragma omp for schedule(static)
            for (long li = 0; li < nlines; ++li) {
                // line head: enumerate sites with coordinate 0 on this axis
                long rem = li;
                long base = 0;
                for (int j = 0; j < d; ++j) {
                    if (j == axis) continue;
                    long c = rem % dims[j];
                    rem /= dims[j];
                    base += c * stride[j];
                }
                for (int i = 0; i < n; ++i) line[i] = a[base + i * st];
                if (inverse)
                    dct2_inverse(line);
                else
                    dct2(line);
                for (int i = 0; i < n; ++i) a[base + i * st] = line[i];
            }
        }
    };

    for (int axis = 0; axis < d; ++axis) transform_axis(axis, false);

    // per-axis Neumann eigenvalues lam_k = 2 - 2 cos(pi k / n)
    std::array<std::vector<double>, 3> lam;
    for (int j = 0; j < d; ++j) {
        lam[j].resize(dims[j]);
        for (int k = 0; k < dims[j]; ++k) lam[j][k] = 2.0 - 2.0 * std::cos(kPi * k / dims[j]);
    }
#pragma omp parallel for schedule(static)
    for (long s = 0; s < total; ++s) {
        double l = 0.0;
        for (int j = 0; j < d; ++j) l += lam[j][(s / stride[j]) % dims[j]];
        a[s] = l > 0.0 ? a[s] / (-l) : 0.0; // zero mode pinned to mean zero
    }

    for (int axis = 0; axis < d; ++axis) transform_axis(axis, true);
}

} // namespace latseg
