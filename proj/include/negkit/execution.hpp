#pragma once

// Execution policy for the batch drivers.  Every data-parallel kernel ships a
// serial reference path and an OpenMP path; the two must produce identical
// results (per-item work is independent, results are assembled in input
// order, and floating-point reductions never cross item boundaries).

#ifdef _OPENMP
#include <omp.h>
#endif

namespace negkit {

enum class Execution { Serial, Parallel };

// Number of worker threads a parallel region may use.  `requested <= 0` means
// "whatever OpenMP considers the default"; serial policy always yields 1.
inline int thread_count(Execution exec, int requested = 0) {
  if (exec == Execution::Serial) return 1;
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

}  // namespace negkit
