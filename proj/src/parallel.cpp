#include "pathflux/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace pathflux {

namespace {

unsigned default_threads() {
  if (const char* env = std::getenv("PATHFLUX_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::atomic<unsigned>& cap() {
  static std::atomic<unsigned> value{default_threads()};
  return value;
}

}  // namespace

unsigned thread_count() { return cap().load(); }

void set_thread_count(unsigned n) { cap().store(n == 0 ? 1 : n); }

namespace detail {
bool& in_parallel_region() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

}  // namespace pathflux
