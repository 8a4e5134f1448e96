#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cbfnav {

inline int max_jobs() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline int resolve_jobs(int requested) {
  return requested <= 0 ? max_jobs() : requested;
}

// Runs fn(i) for i in [0, n). jobs <= 1 takes the serial reference path.
// The parallel path requires fn to write only into slot i of preallocated
// storage; reductions happen serially afterwards, so results are identical
// for every thread count.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(jobs)
  for (int i = 0; i < n; ++i) fn(i);
#else
  for (int i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace cbfnav
