#pragma once

#include <array>
#include <vector>

#include "pathflux/decomposition.hpp"
#include "pathflux/joint_law.hpp"
#include "pathflux/nuisance_set.hpp"
#include "pathflux/target.hpp"

namespace pathflux {

// Distribution of W used for the outer expectation of the plug-in functionals.
struct WMarginal {
  std::vector<double> p;
};

void validate(const WMarginal& wm, int card_w);
WMarginal w_marginal(const JointLaw& law);

// E[Y_t | A = a, W = w] as a functional of eta. Throws IdentificationError when a cell
// carrying positive weight is undefined.
double identified_conditional_mean(const NuisanceSet& eta, TargetId t, int a, int w);

// tau_t(eta) = sum_w wm(w) sum_a f(a) p_A(a | w) E[Y_t | a, w].
double identify_tau(const NuisanceSet& eta, const WMarginal& wm, TargetId t, const Weight& f);

// E[Y_t | A = a], with dP(w | a) obtained from wm and p_A by Bayes' rule.
double identify_conditional_mean(const NuisanceSet& eta, const WMarginal& wm, TargetId t, int a);

// E[f(A) E(Y | W)], the confounding part of E[f(A) Y].
double identify_total(const NuisanceSet& eta, const WMarginal& wm, const Weight& f);

// p(m | a, w) = sum_z p_M(m | z, a, w) p_Z(z | a, w).
double implied_p_m(const NuisanceSet& eta, int m, int a, int w);

// Plug-in means of the ATE-split counterfactuals (binary A), indexed as kAllAteMeans.
std::array<double, 8> identify_ate_means(const NuisanceSet& eta, const WMarginal& wm);
AteComponents identify_ate_components(const NuisanceSet& eta, const WMarginal& wm);

}  // namespace pathflux
