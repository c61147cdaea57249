#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pathflux/cards.hpp"

namespace pathflux {

// n i.i.d. rows of (w, a, z, m, y) with integer-coded discrete columns.
struct Dataset {
  Cards cards;
  std::vector<Observation> rows;

  std::size_t size() const { return rows.size(); }
};

// Throws ValidationError naming the first offending row.
void validate(const Dataset& data);

// Empirical law of W over the given rows (all rows when `rows` is empty).
std::vector<double> empirical_w(const Dataset& data, std::span<const std::size_t> rows = {});

}  // namespace pathflux
