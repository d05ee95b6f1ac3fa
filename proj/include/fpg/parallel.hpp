#pragma once

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fpg {

enum class Exec { Serial, Parallel };

// Data-parallel loop over [0, n). Every index writes only to its own output
// slot, so the parallel path is bit-identical to the serial reference used
// in the tests. Loops below `grain` iterations run serially: the team
// launch costs more than the loop body at that size. An exception thrown by
// the body is captured and rethrown after the region (it may not escape an
// OpenMP worker directly).
template <typename F>
void parallel_for(int n, F&& body, Exec exec = Exec::Parallel,
                  int grain = 64) {
#ifdef _OPENMP
  if (exec == Exec::Parallel && n >= grain) {
    std::exception_ptr error = nullptr;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
#pragma omp critical(fpg_parallel_for_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    return;
  }
#else
  (void)exec;
  (void)grain;
#endif
  for (int i = 0; i < n; ++i) body(i);
}

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace fpg
