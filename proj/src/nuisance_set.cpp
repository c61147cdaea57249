#include "pathflux/nuisance_set.hpp"

#include <algorithm>
#include <sstream>

namespace pathflux {

NuisanceSet NuisanceSet::undefined(const Cards& c) {
  NuisanceSet eta;
  eta.cards = c;
  eta.m_hat = MaskedTable(c.cells());
  eta.p_m = MaskedTable(c.cells());
  eta.p_z = MaskedTable(c.zaw_cells());
  eta.p_a = MaskedTable(c.aw_cells());
  return eta;
}

bool NuisanceSet::fully_defined() const {
  auto all = [](const MaskedTable& t) {
    return std::all_of(t.defined.begin(), t.defined.end(), [](std::uint8_t d) { return d != 0; });
  };
  return all(m_hat) && all(p_m) && all(p_z) && all(p_a);
}

std::string m_hat_label(int a, int z, int m, int w) {
  std::ostringstream os;
  os << "m_hat(a=" << a << ", z=" << z << ", m=" << m << ", w=" << w << ")";
  return os.str();
}

std::string p_m_label(int m, int z, int a, int w) {
  std::ostringstream os;
  os << "p_M(m=" << m << " | z=" << z << ", a=" << a << ", w=" << w << ")";
  return os.str();
}

std::string p_z_label(int z, int a, int w) {
  std::ostringstream os;
  os << "p_Z(z=" << z << " | a=" << a << ", w=" << w << ")";
  return os.str();
}

std::string p_a_label(int a, int w) {
  std::ostringstream os;
  os << "p_A(a=" << a << " | w=" << w << ")";
  return os.str();
}

}  // namespace pathflux
