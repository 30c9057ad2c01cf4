#pragma once

#include <cstddef>

namespace eunsim {

// Global switch between the OpenMP kernels and the serial reference path.
// The serial path is kept as the reference implementation: every kernel must
// produce bit-identical results under both, which the tests assert.
bool parallel_enabled();
void set_parallel(bool on);

// Number of worker threads the OpenMP path would use right now.
int worker_count();

namespace detail {
void parallel_for_impl(std::size_t n, void (*body)(std::size_t, void*), void* ctx);
}

// Runs fn(i) for i in [0, n). Iterations must be independent and must not
// fold floating-point results across iterations in visitation order; callers
// write into per-index slots and reduce serially afterwards.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
  detail::parallel_for_impl(
      n, [](std::size_t i, void* ctx) { (*static_cast<F*>(ctx))(i); },
      const_cast<void*>(static_cast<const void*>(&fn)));
}

}  // namespace eunsim
