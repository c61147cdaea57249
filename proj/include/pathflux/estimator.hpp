#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pathflux/dataset.hpp"
#include "pathflux/decomposition.hpp"
#include "pathflux/nuisance.hpp"
#include "pathflux/target.hpp"

namespace pathflux {

inline constexpr double kZ95 = 1.959964;

struct EstimatorConfig {
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  double ci_level = 0.95;
  NuisanceConfig nuisance;
};

void validate(const EstimatorConfig& cfg, const Dataset& data);

// Two-sided normal quantile for the given coverage level.
double wald_quantile(double level);

struct EstimateReport {
  double point = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double level = 0.95;
  std::size_t n = 0;
  std::size_t folds = 0;
  std::vector<double> fold_points;
};

// Point and Wald interval from per-row influence values (mean-zero parts) around `point`.
EstimateReport wald_report(double point, std::span<const double> influence, double level);

struct DecompositionReport {
  EstimateReport theta, p1, p2, p3, p4, p2_or_p3;

  double telescoping_gap() const;
};

struct AteReport {
  EstimateReport psi, p1, p2, p3, p4, p2_or_p3;
  std::array<EstimateReport, 8> means;  // indexed as kAllAteMeans

  double telescoping_gap() const;
};

struct TotalInfluenceReport {
  EstimateReport theta;
  EstimateReport tau_conf;
  std::vector<std::optional<EstimateReport>> f_curve;  // empty where no row has A = a
};

// Fold plan plus one nuisance fit per training set, shared by every target of a run.
struct CrossFit {
  FoldPlan plan;
  std::vector<NuisanceSet> etas;
};

// Throws NumericalGuardError naming the fold when a training set misses a level of A.
CrossFit cross_fit(const Dataset& data, const EstimatorConfig& cfg);

// Per-row cross-fitted uncentered gradient values of E[f(A) Y_t].
std::vector<double> gradient_values(const Dataset& data, const CrossFit& cf, TargetId t, const Weight& f);

EstimateReport estimate_tau(const Dataset& data, TargetId t, const Weight& f, const EstimatorConfig& cfg);
EstimateReport estimate_tau(const Dataset& data, const CrossFit& cf, TargetId t, const Weight& f,
                            const EstimatorConfig& cfg);

DecompositionReport decompose_paths(const Dataset& data, const EstimatorConfig& cfg);
DecompositionReport decompose_paths(const Dataset& data, const CrossFit& cf, const EstimatorConfig& cfg);

AteReport decompose_ate(const Dataset& data, const EstimatorConfig& cfg);
AteReport decompose_ate(const Dataset& data, const CrossFit& cf, const EstimatorConfig& cfg);

TotalInfluenceReport total_influence(const Dataset& data, const EstimatorConfig& cfg);
TotalInfluenceReport total_influence(const Dataset& data, const CrossFit& cf, const EstimatorConfig& cfg);

// Cov(A, Y) with 1/n normalization.
double empirical_covariance(const Dataset& data);

}  // namespace pathflux
