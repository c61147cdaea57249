#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracle_values.hpp"
#include "pathflux/error.hpp"
#include "pathflux/io.hpp"
#include "pathflux/joint_law.hpp"
#include "pathflux/parallel.hpp"
#include "pathflux/rng.hpp"
#include "pathflux/scm.hpp"
#include "pathflux/verify.hpp"

using namespace pathflux;

TEST_CASE("t1 joint law matches the brute-force enumeration") {
  const JointLaw law = enumerate_joint(builtin_scm("t1"));
  REQUIRE(law.prob.size() == t1::kJoint.size());
  for (std::size_t i = 0; i < t1::kJoint.size(); ++i) CHECK(law.prob[i] == doctest::Approx(t1::kJoint[i]).epsilon(1e-14));
  CHECK(law.total_mass() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(law.p_w(0) == doctest::Approx(0.5));
}

TEST_CASE("derived conditionals reproduce the joint law exactly") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DiscreteScm scm = random_scm(seed);
    const JointLaw law = enumerate_joint(scm);
    const NuisanceSet eta = derived_conditionals(law);
    const Cards& c = law.cards;
    for (int w = 0; w < c.w; ++w)
      for (int a = 0; a < c.a; ++a)
        for (int z = 0; z < c.z; ++z)
          for (int m = 0; m < c.m; ++m) {
            const double p = law.p_w(w) * eta.pa(a, w) * eta.pz(z, a, w) * eta.pm(m, z, a, w);
            CHECK(std::abs(p - law.prob[c.cell(w, a, z, m)]) <= 1e-14);
            CHECK(eta.pm(m, z, a, w) == doctest::Approx(scm.structural_p_m(m, z, a, w)).epsilon(1e-12));
            CHECK(eta.mu(a, z, m, w) == doctest::Approx(scm.structural_y_mean(m, z, a, w)).epsilon(1e-12));
          }
  }
}

TEST_CASE("zero-mass conditionals stay undefined") {
  DiscreteScm s = builtin_scm("t0");
  const NuisanceSet eta = derived_conditionals(enumerate_joint(s));
  CHECK(eta.fully_defined());
  s.noise_a = {1.0, 0.0};
  const NuisanceSet eta2 = derived_conditionals(enumerate_joint(s));
  CHECK_FALSE(eta2.p_z.is_defined(s.cards.zaw(0, 1, 0)));
  CHECK_FALSE(eta2.m_hat.is_defined(s.cards.cell(0, 1, 0, 0)));
}

TEST_CASE("validate rejects malformed models") {
  DiscreteScm s = builtin_scm("t1");
  s.noise_a = {0.5, 0.4};
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = builtin_scm("t1");
  s.f_z.pop_back();
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = builtin_scm("t1");
  s.f_m[0] = 7;
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = builtin_scm("t1");
  s.f_y[0] = std::nan("");
  CHECK_THROWS_AS(validate(s), ValidationError);
  CHECK_THROWS_AS(builtin_scm("t9"), ValidationError);
}

TEST_CASE("cell budget guards enumeration") {
  CHECK_THROWS_AS(enumerate_joint(builtin_scm("t1"), 4), CapacityError);
}

TEST_CASE("sample is reproducible and independent of thread count") {
  const DiscreteScm scm = builtin_scm("t1");
  const unsigned before = thread_count();
  set_thread_count(1);
  const Dataset a = sample(scm, 2000, 42);
  set_thread_count(4);
  const Dataset b = sample(scm, 2000, 42);
  set_thread_count(before);
  std::ostringstream sa, sb;
  write_csv(sa, a);
  write_csv(sb, b);
  CHECK(sa.str() == sb.str());
  const Dataset c = sample(scm, 2000, 43);
  std::ostringstream sc;
  write_csv(sc, c);
  CHECK(sa.str() != sc.str());
}

TEST_CASE("sample frequencies converge to the joint law") {
  const DiscreteScm scm = builtin_scm("t1");
  const std::size_t n = 200000;
  const Dataset d = sample(scm, n, 7);
  std::vector<double> freq(16, 0.0);
  double ybar = 0.0;
  for (const auto& o : d.rows) {
    freq[d.cards.cell(o.w, o.a, o.z, o.m)] += 1.0 / n;
    ybar += o.y / n;
  }
  for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(freq[i] - t1::kJoint[i]) < 5.0 * std::sqrt(t1::kJoint[i] / n) + 1e-9);
  CHECK(std::abs(ybar - t1::kMeanY[0]) < 0.02);
}

TEST_CASE("t0 is degenerate with Y = A") {
  const Dataset d = sample(builtin_scm("t0"), 100, 1);
  CHECK(d.size() == 100);
  for (const auto& o : d.rows) {
    CHECK(o.w == 0);
    CHECK(o.z == 0);
    CHECK(o.m == 0);
    CHECK(o.y == static_cast<double>(o.a));
  }
}

TEST_CASE("counter rng streams") {
  CounterRng r1(5, 0), r2(5, 0), r3(5, 1);
  CHECK(r1.next_u64() == r2.next_u64());
  CHECK(r1.next_u64() != r3.next_u64());
  CounterRng r(9, 3);
  const std::vector<double> pmf{0.0, 1.0, 0.0};
  for (int i = 0; i < 50; ++i) CHECK(r.categorical(pmf) == 1);
  for (int i = 0; i < 200; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7);
  }
}

TEST_CASE("scm json round trip") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DiscreteScm s = random_scm(seed);
    const DiscreteScm back = scm_from_json(json::parse(scm_to_json(s).dump()));
    CHECK(back.cards == s.cards);
    CHECK(back.f_y == s.f_y);
    CHECK(back.f_m == s.f_m);
    CHECK(back.noise_y == s.noise_y);
  }
  json bad = scm_to_json(builtin_scm("t1"));
  bad["f_z"][0].erase(0);
  CHECK_THROWS_AS(scm_from_json(bad), ValidationError);
  json missing = scm_to_json(builtin_scm("t1"));
  missing.erase("noise");
  CHECK_THROWS_AS(scm_from_json(missing), ValidationError);
}

TEST_CASE("csv reader") {
  std::istringstream ok("w,a,z,m,y\n0,1,0,1,2.5\n1,0,1,0,-1\n");
  const LoadedData d = read_csv(ok);
  CHECK(d.data.size() == 2);
  CHECK(d.data.cards == Cards{2, 2, 2, 2});
  CHECK(d.data.rows[0].y == 2.5);

  std::istringstream neg("w,a,z,m,y\n0,1,0,1,2.5\n0,-1,0,0,1\n");
  try {
    read_csv(neg);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
  std::istringstream short_row("w,a,z,m,y\n0,1,0\n");
  CHECK_THROWS_AS(read_csv(short_row), ValidationError);
  std::istringstream no_col("w,a,z,y\n0,1,0,1\n");
  CHECK_THROWS_AS(read_csv(no_col), ValidationError);

  std::istringstream multi("sex,age,a,z,m,y\n1,30,0,0,0,1\n0,30,1,0,0,2\n1,30,1,1,0,3\n");
  CsvOptions opts;
  opts.w_columns = {"sex", "age"};
  const LoadedData md = read_csv(multi, opts);
  CHECK(md.data.cards.w == 2);
  CHECK(md.codebook.levels.size() == 2);
  CHECK(md.codebook.levels[md.data.rows[0].w] == std::vector<long>{1, 30});
  CHECK(md.data.rows[0].w == md.data.rows[2].w);
}
