#pragma once

#include <cstdint>
#include <span>

namespace pathflux {

std::uint64_t mix64(std::uint64_t x);

// Derives an independent seed for sub-stream `stream` of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Counter-based generator: output i of (seed, stream) is a hash of (key, i), so any
// stream can be produced on any worker without coupling to other streams.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound);
  // Inverse-CDF draw from a pmf.
  int categorical(std::span<const double> pmf);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pathflux
