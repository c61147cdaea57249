#pragma once

#include <cstdint>
#include <vector>

#include "pathflux/cards.hpp"
#include "pathflux/nuisance_set.hpp"
#include "pathflux/scm.hpp"

namespace pathflux {

inline constexpr std::uint64_t kDefaultCellBudget = 100'000'000;

// Exact law of (W, A, Z, M) implied by a DiscreteScm, plus E[Y | W, A, Z, M].
// Both tables use Cards::cell layout; y_mean is meaningful only where prob > 0.
struct JointLaw {
  Cards cards;
  std::vector<double> prob;
  std::vector<double> y_mean;

  double total_mass() const;
  double p_w(int w) const;
};

JointLaw enumerate_joint(const DiscreteScm& scm, std::uint64_t cell_budget = kDefaultCellBudget);

// Exact nuisances read off the joint law. Conditionals on zero-mass events are left
// undefined rather than set to 0/0.
NuisanceSet derived_conditionals(const JointLaw& law);

}  // namespace pathflux
