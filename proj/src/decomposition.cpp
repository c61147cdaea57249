#include "pathflux/decomposition.hpp"

namespace pathflux {

PathComponents path_components(const std::array<double, 8>& c) {
  // kAllTargets order: 00 10 11 21 22 32 30 40
  PathComponents r;
  r.theta = c[0] - c[7];
  r.p1 = c[0] - c[1];
  r.p2 = c[2] - c[3];
  r.p3 = c[4] - c[5];
  r.p4 = c[6] - c[7];
  r.p2_or_p3 = c[1] - c[2] + c[3] - c[4] + c[5] - c[6];
  return r;
}

std::string_view ate_mean_name(AteMean which) {
  switch (which) {
    case AteMean::s0: return "S0";
    case AteMean::s1: return "S1";
    case AteMean::s1_prime: return "S1'";
    case AteMean::s2_prime: return "S2'";
    case AteMean::s2_double_prime: return "S2''";
    case AteMean::s3_double_prime: return "S3''";
    case AteMean::s3: return "S3";
    case AteMean::s4: return "S4";
  }
  return "?";
}

AteComponents ate_components(const std::array<double, 8>& e) {
  // kAllAteMeans order: S0 S1 S1' S2' S2'' S3'' S3 S4
  AteComponents r;
  r.psi = e[0] - e[7];
  r.p1 = e[0] - e[1];
  r.p2 = e[2] - e[3];
  r.p3 = e[4] - e[5];
  r.p4 = e[6] - e[7];
  r.p2_or_p3 = e[1] - e[2] + e[3] - e[4] + e[5] - e[6];
  return r;
}

}  // namespace pathflux
