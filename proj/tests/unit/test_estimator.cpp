#include <cmath>

#include "doctest.h"
#include "oracle_values.hpp"
#include "pathflux/error.hpp"
#include "pathflux/estimator.hpp"
#include "pathflux/parallel.hpp"
#include "pathflux/scm.hpp"

using namespace pathflux;

namespace {

const Dataset& t1_data() {
  static const Dataset d = sample(builtin_scm("t1"), 20000, 2024);
  return d;
}

void check_near(const EstimateReport& r, double truth) {
  CHECK(std::isfinite(r.se));
  CHECK(r.se > 0.0);
  CHECK(std::abs(r.point - truth) <= 4.5 * r.se);
}

}  // namespace

TEST_CASE("decomposition is consistent and telescopes exactly") {
  const DecompositionReport r = decompose_paths(t1_data(), EstimatorConfig{});
  CHECK(std::abs(r.telescoping_gap()) <= 1e-12);
  check_near(r.theta, t1::kTheta);
  check_near(r.p1, t1::kP1);
  check_near(r.p2, t1::kP2);
  check_near(r.p3, t1::kP3);
  check_near(r.p4, t1::kP4);
  CHECK(std::abs(r.p2_or_p3.point) <= 4.5 * r.p2_or_p3.se + 1e-12);
  CHECK(r.theta.n == 20000);
  CHECK(r.theta.folds == 5);
  CHECK(r.theta.fold_points.size() == 5);
  CHECK(r.theta.ci_lo < r.theta.point);
  CHECK(r.theta.ci_hi - r.theta.point == doctest::Approx(kZ95 * r.theta.se));
}

TEST_CASE("ATE split is consistent and telescopes exactly") {
  const AteReport r = decompose_ate(t1_data(), EstimatorConfig{});
  CHECK(std::abs(r.telescoping_gap()) <= 1e-12);
  check_near(r.psi, t1::kPsi);
  check_near(r.p1, t1::kPsiP1);
  check_near(r.p2, t1::kPsiP2);
  check_near(r.p3, t1::kPsiP3);
  check_near(r.p4, t1::kPsiP4);
  for (std::size_t k = 0; k < 8; ++k) check_near(r.means[k], t1::kAteMeans[k]);
}

TEST_CASE("single target and total influence") {
  const Dataset& d = t1_data();
  const EstimatorConfig cfg;
  for (std::size_t k = 1; k < 8; ++k)
    check_near(estimate_tau(d, kAllTargets[k], Weight::identity(2), cfg), t1::kMeanAY[k]);
  check_near(estimate_tau(d, kS2Removed, Weight::unit(2), cfg), t1::kMeanY[4]);
  const TotalInfluenceReport ti = total_influence(d, cfg);
  check_near(ti.theta, t1::kTheta);
  check_near(ti.tau_conf, t1::kTauConf);
  CHECK(std::abs(ti.theta.point + ti.tau_conf.point - empirical_covariance(d)) <= 0.02);
  REQUIRE(ti.f_curve.size() == 2);
  CHECK(ti.f_curve[0].has_value());
  CHECK(ti.f_curve[1].has_value());
}

TEST_CASE("results do not depend on the worker count") {
  const Dataset d = sample(builtin_scm("t1"), 3000, 8);
  const unsigned before = thread_count();
  set_thread_count(1);
  const DecompositionReport a = decompose_paths(d, EstimatorConfig{});
  set_thread_count(3);
  const DecompositionReport b = decompose_paths(d, EstimatorConfig{});
  set_thread_count(before);
  CHECK(a.theta.point == b.theta.point);
  CHECK(a.p3.se == b.p3.se);
  CHECK(a.p2_or_p3.fold_points == b.p2_or_p3.fold_points);
}

TEST_CASE("the fold seed changes the split") {
  const Dataset d = sample(builtin_scm("t1"), 3000, 8);
  EstimatorConfig c1, c2;
  c2.seed = 99;
  CHECK(decompose_paths(d, c1).theta.point != decompose_paths(d, c2).theta.point);
  CHECK(decompose_paths(d, c1).theta.point == decompose_paths(d, c1).theta.point);
}

TEST_CASE("ridge regression runs end to end") {
  EstimatorConfig cfg;
  cfg.nuisance.regression = RegressionKind::ridge_onehot;
  cfg.nuisance.lambda = 0.1;
  const DecompositionReport r = decompose_paths(t1_data(), cfg);
  CHECK(std::abs(r.telescoping_gap()) <= 1e-12);
  check_near(r.theta, t1::kTheta);
}

TEST_CASE("overlap violation names the fold") {
  Dataset d = sample(builtin_scm("t0"), 50, 3);
  for (auto& o : d.rows) o.a = 0, o.y = 0.0;
  d.rows[7].a = 1;
  d.rows[7].y = 1.0;
  try {
    decompose_paths(d, EstimatorConfig{});
    FAIL("expected an overlap error");
  } catch (const NumericalGuardError& e) {
    CHECK(std::string(e.what()).find("fold") != std::string::npos);
  }
}

TEST_CASE("configuration errors") {
  const Dataset d = sample(builtin_scm("t1"), 4, 1);
  EstimatorConfig cfg;
  CHECK_THROWS_AS(validate(cfg, d), ValidationError);
  cfg.folds = 2;
  cfg.ci_level = 1.0;
  CHECK_THROWS_AS(validate(cfg, d), ValidationError);
  Dataset three = sample(builtin_scm("t1"), 100, 1);
  three.cards.a = 3;
  CHECK_THROWS_AS(decompose_ate(three, EstimatorConfig{}), ValidationError);
}

TEST_CASE("wald intervals") {
  CHECK(wald_quantile(0.95) == kZ95);
  CHECK(wald_quantile(0.90) == doctest::Approx(1.6448536).epsilon(1e-6));
  const std::vector<double> infl{1.0, -1.0, 1.0, -1.0};
  const EstimateReport r = wald_report(2.0, infl, 0.95);
  CHECK(r.point == 2.0);
  CHECK(r.n == 4);
  CHECK(r.se == doctest::Approx(std::sqrt(4.0 / 3.0) / 2.0).epsilon(1e-12));
}
