#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pathflux/cards.hpp"

namespace pathflux {

// Finite discrete structural causal model
//
//   W = f_W(U_W), A = f_A(W, U_A), Z = f_Z(A, W, U_Z),
//   M = f_M(Z, A, W, U_M), Y = f_Y(M, Z, A, W, U_Y),
//
// with mutually independent noise terms of finite support. Structural tables are stored
// flat, with the noise index varying fastest and the remaining arguments in the order
// written above (so f_m is indexed [z][a][w][u]).
struct DiscreteScm {
  Cards cards;

  std::vector<double> noise_w;
  std::vector<double> noise_a;
  std::vector<double> noise_z;
  std::vector<double> noise_m;
  std::vector<double> noise_y;

  std::vector<int> f_w;     // [u]
  std::vector<int> f_a;     // [w][u]
  std::vector<int> f_z;     // [a][w][u]
  std::vector<int> f_m;     // [z][a][w][u]
  std::vector<double> f_y;  // [m][z][a][w][u]

  std::size_t support_w() const { return noise_w.size(); }
  std::size_t support_a() const { return noise_a.size(); }
  std::size_t support_z() const { return noise_z.size(); }
  std::size_t support_m() const { return noise_m.size(); }
  std::size_t support_y() const { return noise_y.size(); }

  int eval_w(std::size_t u) const { return f_w[u]; }
  int eval_a(int w, std::size_t u) const { return f_a[static_cast<std::size_t>(w) * support_a() + u]; }
  int eval_z(int a, int w, std::size_t u) const {
    return f_z[(static_cast<std::size_t>(a) * cards.w + w) * support_z() + u];
  }
  int eval_m(int z, int a, int w, std::size_t u) const {
    return f_m[((static_cast<std::size_t>(z) * cards.a + a) * cards.w + w) * support_m() + u];
  }
  double eval_y(int m, int z, int a, int w, std::size_t u) const {
    return f_y[(((static_cast<std::size_t>(m) * cards.z + z) * cards.a + a) * cards.w + w) *
                   support_y() +
               u];
  }

  // Structural pushforward pmfs. Under independent noise these equal the observational
  // conditionals wherever the conditioning event has positive mass, and are defined
  // everywhere else too.
  double structural_p_a(int a, int w) const;
  double structural_p_z(int z, int a, int w) const;
  double structural_p_m(int m, int z, int a, int w) const;
  // E[f_Y(m, z, a, w, U_Y)].
  double structural_y_mean(int m, int z, int a, int w) const;
};

// Throws ValidationError describing the first violated invariant.
void validate(const DiscreteScm& scm);

// Size of the plain noise grid, product of the five supports.
std::uint64_t noise_grid_size(const DiscreteScm& scm);

// `t0`: W and Z and M degenerate, A ~ Bern(0.5), Y = A.
// `t1`: the canonical binary test model used throughout the test suite.
DiscreteScm builtin_scm(std::string_view name);
bool is_builtin_scm(std::string_view name);

}  // namespace pathflux

#include "pathflux/dataset.hpp"

namespace pathflux {

// i.i.d. draws; row i consumes counter stream i of `seed`, so the result is
// bit-identical for any worker count.
Dataset sample(const DiscreteScm& scm, std::size_t n, std::uint64_t seed);

}  // namespace pathflux
