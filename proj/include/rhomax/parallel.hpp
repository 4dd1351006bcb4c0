#pragma once

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

// Thin wrapper over OpenMP thread control.  All parallel kernels in this
// library write per-item results into preallocated slots and reduce them in
// a fixed serial order afterwards, so results are identical for any thread
// count (including builds without OpenMP).

namespace rhomax::parallel {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// Default thread count: the RHOMAX_THREADS environment variable when set to
// a positive integer, otherwise whatever the runtime offers.
inline int default_threads() {
  if (const char* env = std::getenv("RHOMAX_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return max_threads();
}

} // namespace rhomax::parallel
