// Benchmark comparing the serial reference kernels against the OpenMP
// variants: density-system step, limit-equation step, and the forward
// generator application of the exact oracle.

#include <cstdio>
#include <functional>
#include <vector>

#include "latseg/hydro.hpp"
#include "latseg/master.hpp"
#include "latseg/parallel.hpp"
#include "latseg/stefan.hpp"

using namespace latseg;

namespace {

double time_loop(int iters, const std::function<void()>& fn) {
    fn(); // warm up
    double t0 = wtime();
    for (int i = 0; i < iters; ++i) fn();
    return (wtime() - t0) / iters;
}

void bench_hydro(int d, int N, int iters) {
    Torus torus(d, N);
    HydroState s(torus);
    for (long x = 0; x < torus.nsites(); ++x) {
        s.u1[x] = 0.4 + 0.2 * ((x * 2654435761u) % 1000) / 1000.0;
        s.u2[x] = 0.3 + 0.2 * ((x * 40503u) % 1000) / 1000.0;
    }
    HydroParams p{1.0, 2.0, 2.0};
    double dt = hydro_stable_dt(torus, p, DtControl{});
    std::vector<double> scratch;
    HydroState s1 = s, s2 = s;
    double ts = time_loop(iters, [&] { hydro_step(s1, dt, p, false, scratch); });
    double tp = time_loop(iters, [&] { hydro_step(s2, dt, p, true, scratch); });
    std::printf("hydro_step   d=%d N=%-5d sites=%-8ld serial %.3e s  omp %.3e s  speedup %.2f\n",
                d, N, torus.nsites(), ts, tp, ts / tp);
}

void bench_stefan(int M, int iters) {
    Torus grid(1, M);
    StefanState s(grid);
    for (long x = 0; x < grid.nsites(); ++x) s.w[x] = ((x * 2654435761u) % 2000) / 1000.0 - 1.0;
    StefanParams p{1.0, 2.0};
    double dt = stefan_stable_dt(grid, p, DtControl{});
    std::vector<double> scratch;
    StefanState s1 = s, s2 = s;
    double ts = time_loop(iters, [&] { stefan_step(s1, dt, p, false, scratch); });
    double tp = time_loop(iters, [&] { stefan_step(s2, dt, p, true, scratch); });
    std::printf("stefan_step  M=%-7d cells=%-8ld serial %.3e s  omp %.3e s  speedup %.2f\n", M,
                grid.nsites(), ts, tp, ts / tp);
}

void bench_master(int N, int iters) {
    MasterParams mp;
    mp.N = N;
    mp.K = 2.0;
    Generator g = build_generator(mp);
    std::vector<double> mu(g.space.nstates(), 1.0 / g.space.nstates());
    std::vector<double> dmu(mu.size());
    double ts = time_loop(iters, [&] { g.apply_forward(mu.data(), dmu.data(), false); });
    double tp = time_loop(iters, [&] { g.apply_forward(mu.data(), dmu.data(), true); });
    std::printf("gen_forward  N=%-7d states=%-7ld serial %.3e s  omp %.3e s  speedup %.2f\n", N,
                g.space.nstates(), ts, tp, ts / tp);
}

} // namespace

int main() {
    std::printf("threads available: %d\n", max_threads());
    bench_hydro(1, 1 << 16, 50);
    bench_hydro(2, 512, 20);
    bench_stefan(1 << 16, 50);
    bench_master(8, 20);
    return 0;
}
