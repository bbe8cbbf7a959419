#pragma once

namespace convexcheck {

/// OpenMP team size for the data-parallel kernels: omp_get_max_threads(),
/// capped by the CONVEXCHECK_THREADS environment variable when it holds a
/// positive integer. Returns 1 when called from inside a parallel region.
int thread_count();

}  // namespace convexcheck
