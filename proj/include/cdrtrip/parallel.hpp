#pragma once

#include <cstddef>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cdrtrip {

inline int resolve_workers(int workers) {
    if (workers > 0) return workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n). workers <= 1 is the serial reference path; the
// OpenMP path must only write to disjoint per-index slots so results are
// bitwise identical to the serial path regardless of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    workers = resolve_workers(workers);
#ifdef _OPENMP
    if (workers > 1 && n > 1) {
#pragma omp parallel for schedule(dynamic, 16) num_threads(workers)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            fn(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace cdrtrip
