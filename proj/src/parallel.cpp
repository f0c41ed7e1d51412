#include "ddkl/parallel.hpp"

#include <atomic>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ddkl {

namespace {
std::atomic<int> override_cap{0};
}

int thread_cap() {
#ifdef _OPENMP
  const int forced = override_cap.load(std::memory_order_relaxed);
  if (forced > 0) return forced;
  static const int cap = [] {
    if (const char* env = std::getenv("DDKL_THREADS")) {
      const int v = std::atoi(env);
      if (v > 0) return v;
    }
    return omp_get_max_threads();
  }();
  return cap;
#else
  return 1;
#endif
}

void set_thread_cap(int n) { override_cap.store(n, std::memory_order_relaxed); }

}  // namespace ddkl
