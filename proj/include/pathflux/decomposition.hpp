#pragma once

#include <array>
#include <string_view>

namespace pathflux {

// theta and its five path components.
struct PathComponents {
  double theta = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double p4 = 0.0;
  double p2_or_p3 = 0.0;

  double component_sum() const { return p1 + p2 + p3 + p4 + p2_or_p3; }
  double additivity_gap() const { return theta - component_sum(); }
};

// Telescopes per-target covariances Cov(A, Y_t), indexed as kAllTargets, into theta and
// the path components.
PathComponents path_components(const std::array<double, 8>& cov);

// Means of the counterfactuals used to split the ATE of a binary A.
enum class AteMean { s0, s1, s1_prime, s2_prime, s2_double_prime, s3_double_prime, s3, s4 };
inline constexpr std::array<AteMean, 8> kAllAteMeans{
    AteMean::s0,           AteMean::s1,
    AteMean::s1_prime,     AteMean::s2_prime,
    AteMean::s2_double_prime, AteMean::s3_double_prime,
    AteMean::s3,           AteMean::s4};
std::string_view ate_mean_name(AteMean which);

struct AteComponents {
  double psi = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double p4 = 0.0;
  double p2_or_p3 = 0.0;

  double component_sum() const { return p1 + p2 + p3 + p4 + p2_or_p3; }
  double additivity_gap() const { return psi - component_sum(); }
};

AteComponents ate_components(const std::array<double, 8>& means);

}  // namespace pathflux
