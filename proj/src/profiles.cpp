#include "latseg/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace latseg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// smooth unit bump peaking at c, vanishing at c + 1/2 (period 1)
double bump_at(double r, double c) {
    double s = std::sin(kPi * (r - c + 0.5));
    return s * s;
}

double grad_envelope(const DensityField& u) {
    double g[3], worst = 0.0;
    for (long x = 0; x < u.size(); ++x) {
        discrete_gradient(u, x, g);
        for (int j = 0; j < u.torus.dim(); ++j) worst = std::max(worst, std::abs(g[j]));
    }
    return worst;
}

ProfileInfo make_info(const DensityField& u1, const DensityField& u2, double K) {
    ProfileInfo info;
    double lo = 1.0, hi = 0.0;
    for (long x = 0; x < u1.size(); ++x) {
        lo = std::min({lo, u1[x], u2[x]});
        hi = std::max({hi, u1[x], u2[x]});
    }
    info.c2 = hi;
    info.c1 = lo > 0.0 ? -std::log(lo) / std::max(K, 1e-12) : 1e300;
    info.C0 = std::max(grad_envelope(u1), grad_envelope(u2)) / std::max(K, 1e-12);
    return info;
}

} // namespace

TestFn test_function(const std::string& name) {
    if (name == "one") return [](const double*, int) { return 1.0; };
    if (name == "cos1")
        return [](const double* r, int) { return std::cos(2.0 * kPi * r[0]); };
    if (name == "sin1")
        return [](const double* r, int) { return std::sin(2.0 * kPi * r[0]); };
    if (name == "bump")
        return [](const double* r, int d) {
            double v = 1.0;
            for (int j = 0; j < d; ++j) {
                double s = std::sin(kPi * r[j]);
                v *= s * s;
            }
            return v;
        };
    throw std::invalid_argument("test_function: unknown name " + name);
}

std::vector<std::string> test_function_names() { return {"one", "cos1", "sin1", "bump"}; }

PairProfile build_pair_profile(const std::string& name, const Torus& torus, double K, double a,
                               double b) {
    PairProfile p{DensityField(torus), DensityField(torus), {}};
    const int N = torus.side();
    const double floor_val = std::exp(-2.0 * std::max(K, 1.0)); // c1 = 2 by construction

    auto for_each_site = [&](auto&& fn) {
        for (long s = 0; s < torus.nsites(); ++s) {
            double r = static_cast<double>(torus.coord(s, 0)) / N;
            fn(s, r);
        }
    };

    if (name == "constant") {
        for_each_site([&](long s, double) {
            p.u1[s] = a;
            p.u2[s] = b;
        });
    } else if (name == "sine") {
        const double amp1 = 0.3 * std::min(a, 1.0 - a);
        const double amp2 = 0.3 * std::min(b, 1.0 - b);
        for_each_site([&](long s, double r) {
            p.u1[s] = a + amp1 * std::sin(2.0 * kPi * r);
            p.u2[s] = b - amp2 * std::sin(2.0 * kPi * r);
        });
    } else if (name == "twobump") {
        for_each_site([&](long s, double r) {
            p.u1[s] = std::max(floor_val, 0.65 * bump_at(r, 0.25));
            p.u2[s] = std::max(floor_val, 0.55 * bump_at(r, 0.75));
        });
    } else if (name == "step") {
        // segregated halves, ramped over one lattice cell at each boundary
        for_each_site([&](long s, double r) {
            double hi1 = 0.7, hi2 = 0.6;
            double ramp = 1.0 / N;
            auto sm = [&](double rr, double lo_edge, double hi_edge) {
                // 1 inside [lo_edge, hi_edge], ramp to 0 within one cell outside
                double din = std::min(rr - lo_edge, hi_edge - rr);
                if (din >= 0.0) return 1.0;
                if (din >= -ramp) return 1.0 + din / ramp;
                return 0.0;
            };
            p.u1[s] = std::max(floor_val, hi1 * sm(r, 0.0, 0.5 - 1.0 / N));
            p.u2[s] = std::max(floor_val, hi2 * sm(r, 0.5, 1.0 - 1.0 / N));
        });
    } else {
        throw std::invalid_argument("build_pair_profile: unknown profile " + name);
    }
    p.info = make_info(p.u1, p.u2, K);
    return p;
}

std::vector<std::string> pair_profile_names() { return {"constant", "sine", "twobump", "step"}; }

SignedField build_signed_profile(const std::string& name, const Torus& grid) {
    SignedField w(grid);
    const int M = grid.side();
    for (long s = 0; s < grid.nsites(); ++s) {
        double r = static_cast<double>(grid.coord(s, 0)) / M;
        if (name == "wsine") {
            w[s] = 0.2 + 0.5 * std::sin(2.0 * kPi * r);
        } else if (name == "wstep") {
            w[s] = 0.2 * std::tanh(std::sin(2.0 * kPi * r) / 0.1);
        } else if (name == "wtwobump") {
            w[s] = macro_u1(&r, 1) - macro_u2(&r, 1);
        } else {
            throw std::invalid_argument("build_signed_profile: unknown profile " + name);
        }
    }
    return w;
}

std::vector<std::string> signed_profile_names() { return {"wsine", "wstep", "wtwobump"}; }

double macro_u1(const double* r, int) { return 0.75 * bump_at(r[0], 0.5); }

double macro_u2(const double* r, int) { return 0.55 * bump_at(r[0], 0.0); }

} // namespace latseg
