#include "pathflux/target.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "pathflux/error.hpp"

namespace pathflux {

bool TargetId::is_valid() const {
  return std::find(kAllTargets.begin(), kAllTargets.end(), *this) != kAllTargets.end();
}

bool TargetId::has_gradient() const {
  return std::find(kGradientTargets.begin(), kGradientTargets.end(), *this) != kGradientTargets.end();
}

std::string TargetId::name() const {
  std::ostringstream os;
  os << "S" << j << "^" << k;
  return os.str();
}

std::size_t target_index(TargetId t) {
  const auto it = std::find(kAllTargets.begin(), kAllTargets.end(), t);
  if (it == kAllTargets.end()) require_valid(t);
  return static_cast<std::size_t>(it - kAllTargets.begin());
}

void require_valid(TargetId t) {
  if (!t.is_valid()) {
    std::ostringstream os;
    os << "invalid target (j=" << t.j << ", k=" << t.k << ")";
    throw ValidationError(os.str());
  }
}

TargetId parse_target(const std::string& text) {
  // accepts "j,k", "(j,k)", "Sj^k"
  static const std::regex pair(R"(\s*\(?\s*(\d)\s*,\s*(\d)\s*\)?\s*)");
  static const std::regex named(R"(\s*S(\d)\^(\d)\s*)");
  std::smatch mt;
  TargetId t{-1, -1};
  if (std::regex_match(text, mt, pair) || std::regex_match(text, mt, named))
    t = TargetId{std::stoi(mt[1]), std::stoi(mt[2])};
  if (!t.is_valid()) throw ValidationError("cannot parse target '" + text + "'");
  return t;
}

Weight::Weight(std::vector<double> values, std::string name) : values_(std::move(values)), name_(std::move(name)) {
  if (values_.empty()) throw ValidationError("weight needs at least one level");
}

Weight Weight::identity(int card_a) {
  std::vector<double> v(static_cast<std::size_t>(card_a));
  for (int a = 0; a < card_a; ++a) v[a] = a;
  return Weight(std::move(v), "identity");
}

Weight Weight::unit(int card_a) { return Weight(std::vector<double>(static_cast<std::size_t>(card_a), 1.0), "unit"); }

Weight Weight::indicator(int level, int card_a) {
  if (level < 0 || level >= card_a) throw ValidationError("indicator level outside the levels of A");
  std::vector<double> v(static_cast<std::size_t>(card_a), 0.0);
  v[level] = 1.0;
  return Weight(std::move(v), "indicator" + std::to_string(level));
}

}  // namespace pathflux
