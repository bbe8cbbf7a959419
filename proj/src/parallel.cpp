#include "convexcheck/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace convexcheck {

int thread_count() {
  if (omp_in_parallel()) return 1;
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("CONVEXCHECK_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0 && cap < n) n = cap;
    } catch (const std::exception&) {
      // ignored: not a number
    }
  }
  return n < 1 ? 1 : n;
}

}  // namespace convexcheck
