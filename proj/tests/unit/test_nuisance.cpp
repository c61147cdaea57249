#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "pathflux/error.hpp"
#include "pathflux/joint_law.hpp"
#include "pathflux/nuisance.hpp"
#include "pathflux/scm.hpp"
#include "pathflux/verify.hpp"

using namespace pathflux;

TEST_CASE("fold plans are balanced partitions") {
  const FoldPlan p = make_folds(10, 5, 3);
  CHECK(p.fold_sizes() == std::vector<std::size_t>{2, 2, 2, 2, 2});
  auto s = make_folds(7, 3, 1).fold_sizes();
  std::sort(s.begin(), s.end());
  CHECK(s == std::vector<std::size_t>{2, 2, 3});

  const FoldPlan q = make_folds(103, 4, 9);
  std::vector<int> seen(103, 0);
  for (std::size_t v = 0; v < 4; ++v) {
    for (auto r : q.prediction_rows(v)) ++seen[r];
    CHECK(q.training_rows(v).size() + q.prediction_rows(v).size() == 103);
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  CHECK(make_folds(103, 4, 9).assignment == q.assignment);
  CHECK(make_folds(103, 4, 10).assignment != q.assignment);
  CHECK_THROWS_AS(make_folds(3, 4, 1), ValidationError);
  CHECK_THROWS_AS(make_folds(10, 1, 1), ValidationError);
}

TEST_CASE("floor_and_renormalize") {
  std::vector<double> p{0.0, 0.0005, 0.9995};
  floor_and_renormalize(p, 0.01);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  for (double v : p) CHECK(v >= 0.01 - 1e-15);
  std::vector<double> q{0.2, 0.3, 0.5};
  floor_and_renormalize(q, 0.01);
  CHECK(q == std::vector<double>{0.2, 0.3, 0.5});
}

TEST_CASE("balanced table fit") {
  Dataset d;
  d.cards = Cards{2, 2, 2, 2};
  for (int w = 0; w < 2; ++w)
    for (int a = 0; a < 2; ++a)
      for (int z = 0; z < 2; ++z)
        for (int m = 0; m < 2; ++m) d.rows.push_back({w, a, z, m, static_cast<double>(a)});
  const NuisanceSet eta = fit_nuisance(d, NuisanceConfig{});
  for (int w = 0; w < 2; ++w) {
    CHECK(eta.pa(1, w) == doctest::Approx(0.5));
    for (int z = 0; z < 2; ++z)
      for (int m = 0; m < 2; ++m) {
        CHECK(eta.mu(1, z, m, w) == doctest::Approx(1.0));
        CHECK(eta.mu(0, z, m, w) == doctest::Approx(0.0));
      }
  }
}

TEST_CASE("single row fit stays above the floor") {
  Dataset d;
  d.cards = Cards{2, 3, 2, 2};
  d.rows.push_back({1, 2, 0, 1, 3.0});
  NuisanceConfig cfg;
  cfg.alpha = 1.0;
  const NuisanceSet eta = fit_nuisance(d, cfg);
  CHECK(eta.fully_defined());
  for (double v : eta.p_a.values) CHECK(v >= cfg.epsilon);
  for (double v : eta.p_z.values) CHECK(v >= cfg.epsilon);
  for (double v : eta.p_m.values) CHECK(v >= cfg.epsilon);
  CHECK(eta.pa(2, 1) > eta.pa(0, 1));
  for (double v : eta.m_hat.values) CHECK(v == 3.0);
}

TEST_CASE("empty regression cells fall back to coarser parents") {
  Dataset d;
  d.cards = Cards{1, 2, 2, 2};
  d.rows = {{0, 0, 0, 0, 1.0}, {0, 0, 0, 1, 3.0}, {0, 1, 1, 1, 10.0}};
  const NuisanceSet eta = fit_nuisance(d, NuisanceConfig{});
  CHECK(eta.mu(0, 0, 0, 0) == 1.0);
  CHECK(eta.mu(0, 0, 1, 0) == 3.0);
  // (a=0, z=1, m=*) is empty: drop m, then z.
  CHECK(eta.mu(0, 1, 0, 0) == doctest::Approx(2.0));
  CHECK(eta.mu(1, 0, 0, 0) == doctest::Approx(10.0));
}

TEST_CASE("fits converge to the population nuisances") {
  const DiscreteScm scm = builtin_scm("t1");
  const NuisanceSet truth = derived_conditionals(enumerate_joint(scm));
  const Dataset d = sample(scm, 400000, 5);
  for (RegressionKind kind : {RegressionKind::cell_mean, RegressionKind::ridge_onehot}) {
    NuisanceConfig cfg;
    cfg.regression = kind;
    const NuisanceSet eta = fit_nuisance(d, cfg);
    for (std::size_t i = 0; i < truth.p_m.size(); ++i) CHECK(std::abs(eta.p_m.values[i] - truth.p_m.values[i]) < 0.02);
    for (std::size_t i = 0; i < truth.p_z.size(); ++i) CHECK(std::abs(eta.p_z.values[i] - truth.p_z.values[i]) < 0.01);
    for (std::size_t i = 0; i < truth.p_a.size(); ++i) CHECK(std::abs(eta.p_a.values[i] - truth.p_a.values[i]) < 0.01);
    // t1's outcome is linear plus a z*m term, so both regressions are well specified.
    for (std::size_t i = 0; i < truth.m_hat.size(); ++i) CHECK(std::abs(eta.m_hat.values[i] - truth.m_hat.values[i]) < 0.05);
  }
}

TEST_CASE("fit is invariant to row order") {
  Dataset d = sample(builtin_scm("t1"), 500, 11);
  const NuisanceSet a = fit_nuisance(d, NuisanceConfig{});
  std::reverse(d.rows.begin(), d.rows.end());
  const NuisanceSet b = fit_nuisance(d, NuisanceConfig{});
  CHECK(a.m_hat.values == b.m_hat.values);
  CHECK(a.p_m.values == b.p_m.values);
}

TEST_CASE("config validation") {
  NuisanceConfig cfg;
  cfg.epsilon = 0.6;
  CHECK_THROWS_AS(validate(cfg, Cards{1, 2, 2, 2}), ValidationError);
  cfg = NuisanceConfig{};
  cfg.alpha = -1.0;
  CHECK_THROWS_AS(validate(cfg, Cards{1, 2, 2, 2}), ValidationError);
  cfg = NuisanceConfig{};
  cfg.regression = RegressionKind::ridge_onehot;
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(validate(cfg, Cards{1, 2, 2, 2}), ValidationError);
  CHECK(parse_regression("ridge_onehot") == RegressionKind::ridge_onehot);
  CHECK_THROWS_AS(parse_regression("boosting"), ValidationError);
}

TEST_CASE("perturb moves along a convex path") {
  const NuisanceSet p = derived_conditionals(enumerate_joint(builtin_scm("t1")));
  const NuisanceSet g = random_direction(p, 3);
  const NuisanceSet zero = perturb(p, g, 0.0);
  const NuisanceSet one = perturb(p, g, 1.0);
  for (std::size_t i = 0; i < p.m_hat.size(); ++i) {
    CHECK(zero.m_hat.values[i] == doctest::Approx(p.m_hat.values[i]));
    CHECK(one.m_hat.values[i] == doctest::Approx(g.m_hat.values[i]));
  }
  const NuisanceSet half = perturb(p, g, 0.5, PerturbMask{true, false, false, false});
  CHECK(half.p_m.values == p.p_m.values);
  CHECK(half.m_hat.values[0] == doctest::Approx(0.5 * (p.m_hat.values[0] + g.m_hat.values[0])));
}
