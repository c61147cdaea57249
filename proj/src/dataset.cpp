#include "pathflux/dataset.hpp"

#include <cmath>
#include <sstream>

#include "pathflux/error.hpp"

namespace pathflux {

void validate(const Dataset& d) {
  const Cards& c = d.cards;
  if (c.w < 1 || c.a < 1 || c.z < 1 || c.m < 1)
    throw ValidationError("cardinalities must be positive, got " + c.to_string());
  if (d.rows.empty()) throw ValidationError("dataset has no rows");
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const Observation& o = d.rows[i];
    const char* bad = nullptr;
    if (o.w < 0 || o.w >= c.w) bad = "w";
    else if (o.a < 0 || o.a >= c.a) bad = "a";
    else if (o.z < 0 || o.z >= c.z) bad = "z";
    else if (o.m < 0 || o.m >= c.m) bad = "m";
    else if (!std::isfinite(o.y)) bad = "y";
    if (bad) {
      std::ostringstream os;
      os << "row " << i << ": column " << bad << " out of range for cards " << c.to_string();
      throw ValidationError(os.str());
    }
  }
}

std::vector<double> empirical_w(const Dataset& d, std::span<const std::size_t> rows) {
  std::vector<double> p(static_cast<std::size_t>(d.cards.w), 0.0);
  std::size_t n = 0;
  auto add = [&](const Observation& o) {
    p[static_cast<std::size_t>(o.w)] += 1.0;
    ++n;
  };
  if (rows.empty()) {
    for (const auto& o : d.rows) add(o);
  } else {
    for (std::size_t r : rows) add(d.rows[r]);
  }
  if (n > 0)
    for (double& v : p) v /= static_cast<double>(n);
  return p;
}

}  // namespace pathflux
