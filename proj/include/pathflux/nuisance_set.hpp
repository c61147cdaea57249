#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathflux/cards.hpp"

namespace pathflux {

// Table with an explicit per-cell "defined" marker.
struct MaskedTable {
  std::vector<double> values;
  std::vector<std::uint8_t> defined;

  MaskedTable() = default;
  explicit MaskedTable(std::size_t n, bool all_defined = false)
      : values(n, 0.0), defined(n, all_defined ? 1 : 0) {}

  std::size_t size() const { return values.size(); }
  bool is_defined(std::size_t i) const { return defined[i] != 0; }
  void set(std::size_t i, double v) {
    values[i] = v;
    defined[i] = 1;
  }
};

// eta = (m, p_M, p_Z, p_A): outcome regression E[Y | M, Z, A, W] and the three
// conditional pmfs. m_hat and p_m use Cards::cell layout, p_z uses Cards::zaw and p_a
// uses Cards::aw, so each pmf sums to one over its fastest-varying index.
struct NuisanceSet {
  Cards cards;
  MaskedTable m_hat;
  MaskedTable p_m;
  MaskedTable p_z;
  MaskedTable p_a;
  // Lower bound the pmfs were truncated at; 0 for exact population nuisances.
  double floor = 0.0;

  static NuisanceSet undefined(const Cards& cards);

  double mu(int a, int z, int m, int w) const { return m_hat.values[cards.cell(w, a, z, m)]; }
  double pm(int m, int z, int a, int w) const { return p_m.values[cards.cell(w, a, z, m)]; }
  double pz(int z, int a, int w) const { return p_z.values[cards.zaw(w, a, z)]; }
  double pa(int a, int w) const { return p_a.values[cards.aw(w, a)]; }

  bool fully_defined() const;
};

std::string m_hat_label(int a, int z, int m, int w);
std::string p_m_label(int m, int z, int a, int w);
std::string p_z_label(int z, int a, int w);
std::string p_a_label(int a, int w);

}  // namespace pathflux
