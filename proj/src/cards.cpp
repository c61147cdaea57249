#include "pathflux/cards.hpp"

#include <algorithm>
#include <sstream>

namespace pathflux {

int Cards::max_card() const { return std::max({w, a, z, m}); }

std::string Cards::to_string() const {
  std::ostringstream os;
  os << "(w=" << w << ", a=" << a << ", z=" << z << ", m=" << m << ")";
  return os.str();
}

}  // namespace pathflux
