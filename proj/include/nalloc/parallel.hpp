#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nalloc {

/// Thread-count convention used across the engine:
///   0 -> OpenMP default (or 1 when built without OpenMP)
///   1 -> serial reference path
///   n -> exactly n threads
int resolve_threads(int threads);

/// Static-schedule parallel loop over [0, n). Every iteration writes only
/// its own output slot, so results are identical for any thread count.
template <class F>
void parallel_for(std::int64_t n, int threads, F&& body) {
  const int nt = resolve_threads(threads);
  if (nt <= 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::int64_t i = 0; i < n; ++i) body(i);
#else
  for (std::int64_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace nalloc
