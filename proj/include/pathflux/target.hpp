#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace pathflux {

// Counterfactual Y_{S_j}^{(k)}: information removed along path set S_j, edge-emulation
// variant k.
struct TargetId {
  int j = 0;
  int k = 0;

  bool is_valid() const;
  // Has its own canonical gradient (everything except (0,0) and (2,2)).
  bool has_gradient() const;
  std::string name() const;

  friend bool operator==(const TargetId&, const TargetId&) = default;
};

inline constexpr TargetId kS0{0, 0};
inline constexpr TargetId kS1{1, 0};
inline constexpr TargetId kS1Emulated{1, 1};
inline constexpr TargetId kS2Emulated{2, 1};
inline constexpr TargetId kS2Removed{2, 2};
inline constexpr TargetId kS3Removed{3, 2};
inline constexpr TargetId kS3{3, 0};
inline constexpr TargetId kS4{4, 0};

inline constexpr std::array<TargetId, 8> kAllTargets{kS0,        kS1,        kS1Emulated, kS2Emulated,
                                                     kS2Removed, kS3Removed, kS3,         kS4};
inline constexpr std::array<TargetId, 6> kGradientTargets{kS1,        kS1Emulated, kS2Emulated,
                                                          kS3Removed, kS3,         kS4};

// Position of a valid target in kAllTargets.
std::size_t target_index(TargetId t);
// Throws ValidationError for pairs outside the valid set.
void require_valid(TargetId t);
TargetId parse_target(const std::string& text);

// Weight f(a) applied to A in tau = E[f(A) Y_t], tabulated over the levels of A.
class Weight {
 public:
  static Weight identity(int card_a);
  static Weight unit(int card_a);
  static Weight indicator(int level, int card_a);

  Weight(std::vector<double> values, std::string name);

  double operator()(int a) const { return values_[static_cast<std::size_t>(a)]; }
  std::span<const double> values() const { return values_; }
  int card() const { return static_cast<int>(values_.size()); }
  const std::string& name() const { return name_; }

 private:
  std::vector<double> values_;
  std::string name_;
};

}  // namespace pathflux
