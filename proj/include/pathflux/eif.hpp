#pragma once

#include <cstdint>
#include <vector>

#include "pathflux/decomposition.hpp"
#include "pathflux/nuisance_set.hpp"
#include "pathflux/target.hpp"

namespace pathflux {

struct GradientTarget {
  TargetId t;
  Weight f;
};

// Throws ValidationError unless t has a canonical gradient and f matches card_a.
void validate(const GradientTarget& g, const Cards& cards);

// Weighted pmf integrals that multiply the outcome residual in the canonical gradients.
struct HFunctions {
  Cards cards;
  std::vector<double> h1_0;  // (m, z, w)
  std::vector<double> h1_1;  // (m, z, w)
  std::vector<double> h2_1;  // (m, w)
  std::vector<double> h3_2;  // (m, a', w)
  std::vector<double> h3_0;  // (m, z, w)
  std::vector<double> h4_0;  // (w)

  double at_1_0(int m, int z, int w) const { return h1_0[(static_cast<std::size_t>(w) * cards.z + z) * cards.m + m]; }
  double at_1_1(int m, int z, int w) const { return h1_1[(static_cast<std::size_t>(w) * cards.z + z) * cards.m + m]; }
  double at_2_1(int m, int w) const { return h2_1[static_cast<std::size_t>(w) * cards.m + m]; }
  double at_3_2(int m, int a, int w) const { return h3_2[(static_cast<std::size_t>(w) * cards.a + a) * cards.m + m]; }
  double at_3_0(int m, int z, int w) const { return h3_0[(static_cast<std::size_t>(w) * cards.z + z) * cards.m + m]; }
  double at_4_0(int w) const { return h4_0[static_cast<std::size_t>(w)]; }
};

HFunctions h_tables(const NuisanceSet& eta, const Weight& f);

// Uncentered canonical gradient phi-bar_j^(k)(x; eta). Its mean under P at eta = eta_P is
// tau_j^k(P). Throws NumericalGuardError when a denominator at the observed cell is
// below the truncation floor (or zero).
double eif_uncentered(const Observation& x, const NuisanceSet& eta, const GradientTarget& g,
                      const HFunctions& h);

// phi-bar is affine in y within each (w, a, z, m) cell:
//   phi-bar(x) = weight[cell] * (y - m_hat[cell]) + rest[cell].
// Tabulating once per nuisance fit makes row evaluation O(1).
struct EifTable {
  Cards cards;
  std::vector<double> weight;
  std::vector<double> rest;
  std::vector<double> m_hat;
  std::vector<std::uint8_t> ok;
  std::vector<double> integrand;  // per-w plug-in value G(w)

  double operator()(const Observation& x) const;
};

EifTable eif_table(const NuisanceSet& eta, const GradientTarget& g);

// Same gradient obtained by the chain rule applied mechanically to the identification
// functional: every pmf entry and regression cell gets its own influence term. Used for
// the ATE means, whose gradients have no closed-form display here, and as a cross-check
// of eif_table.
EifTable chain_rule_table(const NuisanceSet& eta, TargetId t, const Weight& f);
EifTable chain_rule_ate_table(const NuisanceSet& eta, AteMean which);

// Per-observation pieces of Cov(A, Y_t) = tau_A - mu_A tau_1.
struct CovarianceComponents {
  double tau_a = 0.0;  // estimate of E[A Y_t]
  double tau_1 = 0.0;  // estimate of E[Y_t]
  double phi_a = 0.0;  // uncentered gradient of E[A Y_t] at x
  double phi_1 = 0.0;  // uncentered gradient of E[Y_t] at x
};

// Influence function of the covariance at an observation with treatment level a.
double covariance_if(double a, const CovarianceComponents& c, double mu_a);

}  // namespace pathflux
