#include <set>

#include "doctest.h"
#include "pathflux/counterfactual.hpp"
#include "pathflux/error.hpp"
#include "pathflux/io.hpp"
#include "pathflux/verify.hpp"

using namespace pathflux;

namespace {

// f_y[m][z][a][w][u] does not depend on a.
bool y_constant_in_a(const DiscreteScm& s) {
  for (int m = 0; m < s.cards.m; ++m)
    for (int z = 0; z < s.cards.z; ++z)
      for (int w = 0; w < s.cards.w; ++w)
        for (std::size_t u = 0; u < s.support_y(); ++u)
          for (int a = 1; a < s.cards.a; ++a)
            if (s.eval_y(m, z, a, w, u) != s.eval_y(m, z, 0, w, u)) return false;
  return true;
}

bool m_constant_in(const DiscreteScm& s, bool in_a) {
  for (int z = 0; z < s.cards.z; ++z)
    for (int a = 0; a < s.cards.a; ++a)
      for (int w = 0; w < s.cards.w; ++w)
        for (std::size_t u = 0; u < s.support_m(); ++u)
          if (s.eval_m(z, a, w, u) != (in_a ? s.eval_m(z, 0, w, u) : s.eval_m(0, a, w, u))) return false;
  return true;
}

}  // namespace

TEST_CASE("random scms are valid and reproducible") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const DiscreteScm s = random_scm(seed);
    CHECK_NOTHROW(validate(s));
    CHECK(s.cards.max_card() <= 3);
    CHECK(s.support_y() <= 4);
    CHECK(scm_to_json(random_scm(seed)) == scm_to_json(s));
    for (double p : s.noise_m) CHECK(p > 0.0);
  }
  CHECK(scm_to_json(random_scm(1)) != scm_to_json(random_scm(2)));
}

TEST_CASE("structural constraints hold by construction") {
  using K = ScmConstraint::Kind;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(y_constant_in_a(random_scm(seed, {K::drop_path, PathId::p1})));
    CHECK(m_constant_in(random_scm(seed, {K::drop_path, PathId::p4}), true));
    CHECK(m_constant_in(random_scm(seed, {K::drop_path, PathId::p3}), false));
    CHECK(random_scm(seed, {K::degenerate_z}).cards.z == 1);
    CHECK(random_scm(seed, {K::none, PathId::total, true}).cards.a == 2);
    const DiscreteScm mono = random_scm(seed, {K::monotone, PathId::total});
    for (int m = 0; m < mono.cards.m; ++m)
      for (int z = 0; z < mono.cards.z; ++z)
        for (int w = 0; w < mono.cards.w; ++w)
          for (std::size_t u = 0; u < mono.support_y(); ++u)
            for (int a = 1; a < mono.cards.a; ++a) CHECK(mono.eval_y(m, z, a, w, u) >= mono.eval_y(m, z, a - 1, w, u));
  }
}

TEST_CASE("sharp nulls on constrained models") {
  for (PathId p : {PathId::p1, PathId::p2, PathId::p3, PathId::p4}) {
    ExperimentSpec spec;
    spec.kind = ExperimentKind::sharp_null;
    spec.path = p;
    spec.scm = ScmSource{ScmSource::Kind::random, ""};
    spec.replications = 10;
    spec.seed = 5;
    const ExperimentReport r = run_experiment(spec);
    CAPTURE(path_name(p));
    CHECK(r.pass);
    CHECK(r.replications.size() == 10);
  }
}

TEST_CASE("verdicts are deterministic") {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::coverage;
  spec.replications = 12;
  spec.n_grid = {500};
  spec.seed = 77;
  const ExperimentReport a = run_experiment(spec), b = run_experiment(spec);
  CHECK(to_json(a) == to_json(b));
}

TEST_CASE("experiment spec validation and parsing") {
  ExperimentSpec spec;
  spec.replications = 0;
  CHECK_THROWS_AS(validate(spec), ValidationError);
  spec.replications = 1;
  spec.kind = ExperimentKind::clt_scaling;
  spec.n_grid = {4000, 1000};
  CHECK_THROWS_AS(validate(spec), ValidationError);
  CHECK_THROWS_AS(parse_experiment("nonsense"), ValidationError);
  CHECK(parse_path("P3") == PathId::p3);
  const ExperimentSpec s = experiment_from_json(json::parse(R"j({"kind":"vonmises","target":"(3,2)","seed":4})j"));
  CHECK(s.kind == ExperimentKind::vonmises);
  CHECK(s.target == kS3Removed);
  CHECK(experiment_from_json(experiment_to_json(s)).target == kS3Removed);
}

TEST_CASE("errors carry the experiment context") {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::report_check;
  spec.data_path = "/nonexistent/data.csv";
  try {
    run_experiment(spec);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("report_check") != std::string::npos);
  }
}
