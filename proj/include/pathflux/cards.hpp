#pragma once

#include <cstddef>
#include <string>

namespace pathflux {

// Level counts of the four discrete nodes. Multivariate W is flattened to one code upstream.
struct Cards {
  int w = 1;
  int a = 1;
  int z = 1;
  int m = 1;

  std::size_t aw_cells() const { return static_cast<std::size_t>(w) * a; }
  std::size_t zaw_cells() const { return aw_cells() * z; }
  std::size_t cells() const { return zaw_cells() * m; }

  // Index layouts shared by every (w, a, z, m)-keyed table in the library.
  std::size_t aw(int wi, int ai) const { return static_cast<std::size_t>(wi) * a + ai; }
  std::size_t zaw(int wi, int ai, int zi) const { return aw(wi, ai) * z + zi; }
  std::size_t cell(int wi, int ai, int zi, int mi) const { return zaw(wi, ai, zi) * m + mi; }

  int max_card() const;
  std::string to_string() const;

  friend bool operator==(const Cards&, const Cards&) = default;
};

// A single observed row X = (W, A, Z, M, Y).
struct Observation {
  int w = 0;
  int a = 0;
  int z = 0;
  int m = 0;
  double y = 0.0;
};

}  // namespace pathflux
