#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace pathflux {

// Worker cap. Defaults to PATHFLUX_THREADS when set, otherwise hardware concurrency.
unsigned thread_count();
void set_thread_count(unsigned n);

namespace detail {
bool& in_parallel_region();
}

// Calls fn(i) for i in [0, n). Results must be written to per-index slots; callers reduce
// in index order afterwards so output never depends on scheduling. Nested calls run inline.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1 || detail::in_parallel_region()) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        detail::in_parallel_region() = true;
        try {
          for (std::size_t i = t; i < n; i += workers) fn(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace pathflux
