#pragma once

// Thin OpenMP shims so serial builds stay valid.
#ifdef _OPENMP
#include <omp.h>
namespace latseg {
inline int max_threads() { return omp_get_max_threads(); }
inline int thread_num() { return omp_get_thread_num(); }
inline void set_threads(int n) { omp_set_num_threads(n); }
inline double wtime() { return omp_get_wtime(); }
} // namespace latseg
#else
#include <chrono>
namespace latseg {
inline int max_threads() { return 1; }
inline int thread_num() { return 0; }
inline void set_threads(int) {}
inline double wtime() {
    using clk = std::chrono::steady_clock;
    return std::chrono::duration<double>(clk::now().time_since_epoch()).count();
}
} // namespace latseg
#endif
