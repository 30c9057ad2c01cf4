#include "eunsim/parallel.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace eunsim {

namespace {
std::atomic<bool> g_parallel{true};
}

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

int worker_count() {
#ifdef _OPENMP
  return parallel_enabled() ? omp_get_max_threads() : 1;
#else
  return 1;
#endif
}

namespace detail {

void parallel_for_impl(std::size_t n, void (*body)(std::size_t, void*), void* ctx) {
#ifdef _OPENMP
  if (parallel_enabled() && n > 1) {
    const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < nn; ++i) {
      body(static_cast<std::size_t>(i), ctx);
    }
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) {
    body(i, ctx);
  }
}

}  // namespace detail

}  // namespace eunsim
