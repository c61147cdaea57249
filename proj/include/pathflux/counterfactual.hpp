#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "pathflux/decomposition.hpp"
#include "pathflux/joint_law.hpp"
#include "pathflux/scm.hpp"
#include "pathflux/target.hpp"

namespace pathflux {

// How the removal draw Z_{A̲} relates to the noise draw A̲.
enum class ZDrawReading {
  // Z_{A̲} ~ p(z | A̲, W) with the same realized A̲ used elsewhere in the counterfactual.
  coupled,
  // Z_{A̲} ~ p(z | W), independent of the realized A̲.
  marginal,
};

struct OracleOptions {
  ZDrawReading z_reading = ZDrawReading::coupled;
  std::uint64_t cell_budget = kDefaultCellBudget;
};

// Exact law of (A, Y_t): the marginal of A and, per level of A with positive mass, the
// conditional pmf of Y_t keyed by its (finitely many) values.
struct CtfLaw {
  std::vector<double> p_a;
  std::vector<std::map<double, double>> y_given_a;

  double conditional_mean(int a) const;
  double mean() const;
  // E[f(A) Y_t].
  double weighted_mean(const Weight& f) const;
};

// Laws of all eight counterfactuals, indexed as kAllTargets, from one enumeration pass.
std::array<CtfLaw, 8> ctf_laws(const DiscreteScm& scm, const OracleOptions& opts = {});
CtfLaw ctf_law(const DiscreteScm& scm, TargetId t, const OracleOptions& opts = {});

double oracle_tau(const DiscreteScm& scm, TargetId t, const Weight& f, const OracleOptions& opts = {});

// theta = Cov(A, Y - Y_{S_4}) split along the four paths plus the P2-or-P3 term.
PathComponents oracle_path_decomposition(const DiscreteScm& scm, const OracleOptions& opts = {});

struct TotalInfluence {
  double theta = 0.0;     // Cov(A, Y - Y_S)
  double tau_conf = 0.0;  // Cov(A, Y_S)
  std::vector<double> residual_curve;  // a -> E[Y - Y_S | A = a]; NaN where P(A = a) = 0
};

TotalInfluence oracle_total_influence(const DiscreteScm& scm, const OracleOptions& opts = {});

// Exact means of the ATE-split counterfactuals, indexed as kAllAteMeans. Requires binary A.
std::array<double, 8> oracle_ate_means(const DiscreteScm& scm, const OracleOptions& opts = {});
AteComponents oracle_ate_decomposition(const DiscreteScm& scm, const OracleOptions& opts = {});

enum class ContrastKind { mean_diff, covariance, kl };

// D(P_t1, P_t2) between the laws of (A, Y_t1) and (A, Y_t2):
//   mean_diff   E[Y_t1] - E[Y_t2]
//   covariance  Cov(A, Y_t1) - Cov(A, Y_t2)
//   kl          sum p1(y, a) log(p1(y, a) / p2(y, a))
double oracle_contrast(const DiscreteScm& scm, TargetId t1, TargetId t2, ContrastKind kind,
                       const OracleOptions& opts = {});
double contrast(const CtfLaw& first, const CtfLaw& second, ContrastKind kind);

}  // namespace pathflux
