#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pathflux/estimator.hpp"
#include "pathflux/scm.hpp"
#include "pathflux/target.hpp"

namespace pathflux {

enum class PathId { total, p1, p2, p3, p4 };

std::string path_name(PathId p);
PathId parse_path(const std::string& text);

struct ScmConstraint {
  enum class Kind { none, drop_path, degenerate_z, monotone };
  Kind kind = Kind::none;
  // drop_path: the structurally excluded path (not `total`).
  // monotone: `total` sorts every table, a single path sorts along that path only.
  PathId path = PathId::total;
  // Force card_a = 2.
  bool binary_a = false;
};

struct RandomScmOptions {
  int max_card = 3;
  int max_support = 4;
};

// Random valid SCM honoring the constraint. Noise pmfs are strictly positive and each
// structural table hits every output level for every parent configuration, so all
// conditionals have full support.
DiscreteScm random_scm(std::uint64_t seed, const ScmConstraint& constraint = {},
                       const RandomScmOptions& opts = {});

enum class ExperimentKind {
  sharp_null,
  monotonicity,
  additivity,
  prop_zero,
  vonmises,
  coverage,
  clt_scaling,
  oracle_identification,
  law_equality,
  report_check,
};

std::string experiment_name(ExperimentKind k);
ExperimentKind parse_experiment(const std::string& text);

struct ScmSource {
  enum class Kind { builtin, file, random };
  Kind kind = Kind::builtin;
  std::string name = "t1";  // builtin name or file path
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::additivity;
  PathId path = PathId::total;
  TargetId target{1, 0};
  ScmSource scm;
  std::size_t replications = 1;
  std::vector<std::size_t> n_grid;
  std::uint64_t seed = 1;
  EstimatorConfig estimator;
  // report_check: dataset file to estimate from.
  std::string data_path;
};

void validate(const ExperimentSpec& spec);

struct ExperimentReport {
  std::string kind;
  std::vector<std::map<std::string, double>> replications;
  std::map<std::string, double> aggregate;
  std::map<std::string, double> tolerances;
  bool pass = false;
  std::string verdict;
};

ExperimentReport run_experiment(const ExperimentSpec& spec);

// von Mises remainder |tau(G) - tau(P) + E_P[phi(X; G)]| along eta_eps = perturb(eta_P, G, eps).
struct RemainderCurve {
  std::vector<double> eps;
  std::vector<double> remainder;
  double slope = 0.0;  // least-squares slope of log remainder on log eps
};

RemainderCurve vonmises_curve(const DiscreteScm& scm, TargetId t, const Weight& f,
                              const NuisanceSet& direction, const std::vector<double>& eps_grid,
                              PerturbMask mask = {});

// Direction nuisances used by the von Mises checks: a random bounded tilt of `base`.
NuisanceSet random_direction(const NuisanceSet& base, std::uint64_t seed);

}  // namespace pathflux
