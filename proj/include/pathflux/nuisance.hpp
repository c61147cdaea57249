#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pathflux/dataset.hpp"
#include "pathflux/nuisance_set.hpp"

namespace pathflux {

// Balanced random partition of {0..n-1} into V prediction sets.
struct FoldPlan {
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignment;  // row -> fold in [0, folds)

  std::vector<std::size_t> prediction_rows(std::size_t fold) const;
  std::vector<std::size_t> training_rows(std::size_t fold) const;
  std::vector<std::size_t> fold_sizes() const;
};

FoldPlan make_folds(std::size_t n, std::size_t folds, std::uint64_t seed);

enum class RegressionKind { cell_mean, ridge_onehot };

struct NuisanceConfig {
  double alpha = 0.5;     // Laplace pseudo-count
  double epsilon = 1e-3;  // pmf truncation floor
  RegressionKind regression = RegressionKind::cell_mean;
  double lambda = 1.0;    // ridge penalty, ridge_onehot only
};

void validate(const NuisanceConfig& cfg, const Cards& cards);
std::string regression_name(RegressionKind kind);
RegressionKind parse_regression(const std::string& name);

// Fits eta on the given rows (all rows when `rows` is empty). Every pmf cell of the result
// lies in [epsilon, 1] and each conditional sums to one.
NuisanceSet fit_nuisance(const Dataset& train, const NuisanceConfig& cfg,
                         std::span<const std::size_t> rows = {});

// Which tables perturb() moves.
struct PerturbMask {
  bool m_hat = true;
  bool p_m = true;
  bool p_z = true;
  bool p_a = true;
};

// Convex move (1 - eps) * eta + eps * direction, table by table, pmfs renormalized.
NuisanceSet perturb(const NuisanceSet& eta, const NuisanceSet& direction, double eps,
                    PerturbMask mask = {});

// Floors each conditional pmf at eps while keeping it summing to one.
void floor_and_renormalize(std::span<double> pmf, double eps);

}  // namespace pathflux
