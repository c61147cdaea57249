#include "pathflux/scm.hpp"

#include <cmath>
#include <sstream>

#include "pathflux/error.hpp"
#include "pathflux/parallel.hpp"
#include "pathflux/rng.hpp"

namespace pathflux {

namespace {

void check_pmf(const std::vector<double>& p, const char* name) {
  if (p.empty()) throw ValidationError(std::string(name) + ": empty pmf");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0) {
      std::ostringstream os;
      os << name << "[" << i << "]: negative or non-finite probability " << p[i];
      throw ValidationError(os.str());
    }
    s += p[i];
  }
  if (std::abs(s - 1.0) > 1e-12) {
    std::ostringstream os;
    os << name << ": pmf sums to " << s;
    throw ValidationError(os.str());
  }
}

void check_total(std::size_t got, std::size_t want, const char* name) {
  if (got != want) {
    std::ostringstream os;
    os << name << ": table not total (" << got << " entries, expected " << want << ")";
    throw ValidationError(os.str());
  }
}

void check_codes(const std::vector<int>& t, int card, const char* name) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 0 || t[i] >= card) {
      std::ostringstream os;
      os << name << "[" << i << "]: output " << t[i] << " outside 0.." << card - 1;
      throw ValidationError(os.str());
    }
  }
}

}  // namespace

void validate(const DiscreteScm& s) {
  const Cards& c = s.cards;
  if (c.w < 1 || c.a < 1 || c.z < 1 || c.m < 1)
    throw ValidationError("cardinalities must be positive, got " + c.to_string());
  check_pmf(s.noise_w, "u_w");
  check_pmf(s.noise_a, "u_a");
  check_pmf(s.noise_z, "u_z");
  check_pmf(s.noise_m, "u_m");
  check_pmf(s.noise_y, "u_y");
  check_total(s.f_w.size(), s.support_w(), "f_w");
  check_total(s.f_a.size(), static_cast<std::size_t>(c.w) * s.support_a(), "f_a");
  check_total(s.f_z.size(), c.aw_cells() * s.support_z(), "f_z");
  check_total(s.f_m.size(), c.zaw_cells() * s.support_m(), "f_m");
  check_total(s.f_y.size(), c.cells() * s.support_y(), "f_y");
  check_codes(s.f_w, c.w, "f_w");
  check_codes(s.f_a, c.a, "f_a");
  check_codes(s.f_z, c.z, "f_z");
  check_codes(s.f_m, c.m, "f_m");
  for (std::size_t i = 0; i < s.f_y.size(); ++i) {
    if (!std::isfinite(s.f_y[i])) {
      std::ostringstream os;
      os << "f_y[" << i << "]: non-finite outcome";
      throw ValidationError(os.str());
    }
  }
}

std::uint64_t noise_grid_size(const DiscreteScm& s) {
  return static_cast<std::uint64_t>(s.support_w()) * s.support_a() * s.support_z() * s.support_m() *
         s.support_y();
}

double DiscreteScm::structural_p_a(int a, int w) const {
  double p = 0.0;
  for (std::size_t u = 0; u < support_a(); ++u)
    if (eval_a(w, u) == a) p += noise_a[u];
  return p;
}

double DiscreteScm::structural_p_z(int z, int a, int w) const {
  double p = 0.0;
  for (std::size_t u = 0; u < support_z(); ++u)
    if (eval_z(a, w, u) == z) p += noise_z[u];
  return p;
}

double DiscreteScm::structural_p_m(int m, int z, int a, int w) const {
  double p = 0.0;
  for (std::size_t u = 0; u < support_m(); ++u)
    if (eval_m(z, a, w, u) == m) p += noise_m[u];
  return p;
}

double DiscreteScm::structural_y_mean(int m, int z, int a, int w) const {
  double s = 0.0;
  for (std::size_t u = 0; u < support_y(); ++u) s += noise_y[u] * eval_y(m, z, a, w, u);
  return s;
}

bool is_builtin_scm(std::string_view name) { return name == "t0" || name == "t1"; }

DiscreteScm builtin_scm(std::string_view name) {
  DiscreteScm s;
  if (name == "t0") {
    s.cards = Cards{1, 2, 1, 1};
    s.noise_w = {1.0};
    s.noise_a = {0.5, 0.5};
    s.noise_z = {1.0};
    s.noise_m = {1.0};
    s.noise_y = {1.0};
    s.f_w = {0};
    s.f_a = {0, 1};
    s.f_z = {0, 0};
    s.f_m = {0, 0};
    s.f_y = {0.0, 1.0};  // [m=0][z=0][a][w=0][u=0]
    return s;
  }
  if (name == "t1") {
    s.cards = Cards{2, 2, 2, 2};
    s.noise_w = {0.5, 0.5};
    s.noise_a = {0.6, 0.4};
    s.noise_z = {0.9, 0.1};
    s.noise_m = {0.7, 0.3};
    s.noise_y = {0.5, 0.5};
    s.f_w = {0, 1};
    for (int w = 0; w < 2; ++w)
      for (int u = 0; u < 2; ++u) s.f_a.push_back(u ^ w);
    for (int a = 0; a < 2; ++a)
      for (int w = 0; w < 2; ++w)
        for (int u = 0; u < 2; ++u) s.f_z.push_back(a ^ u);
    for (int z = 0; z < 2; ++z)
      for (int a = 0; a < 2; ++a)
        for (int w = 0; w < 2; ++w)
          for (int u = 0; u < 2; ++u) s.f_m.push_back((z + a + w >= 2 ? 1 : 0) ^ u);
    for (int m = 0; m < 2; ++m)
      for (int z = 0; z < 2; ++z)
        for (int a = 0; a < 2; ++a)
          for (int w = 0; w < 2; ++w)
            for (int u = 0; u < 2; ++u)
              s.f_y.push_back(a + 0.8 * z + 1.2 * m + 0.5 * w + 0.5 * z * m + u - 0.5);
    return s;
  }
  throw ValidationError("unknown builtin scm '" + std::string(name) + "'");
}

Dataset sample(const DiscreteScm& scm, std::size_t n, std::uint64_t seed) {
  validate(scm);
  if (n == 0) throw ValidationError("sample size must be at least 1");
  Dataset d;
  d.cards = scm.cards;
  d.rows.resize(n);
  parallel_for(n, [&](std::size_t i) {
    CounterRng rng(seed, i);
    Observation& o = d.rows[i];
    o.w = scm.eval_w(static_cast<std::size_t>(rng.categorical(scm.noise_w)));
    o.a = scm.eval_a(o.w, static_cast<std::size_t>(rng.categorical(scm.noise_a)));
    o.z = scm.eval_z(o.a, o.w, static_cast<std::size_t>(rng.categorical(scm.noise_z)));
    o.m = scm.eval_m(o.z, o.a, o.w, static_cast<std::size_t>(rng.categorical(scm.noise_m)));
    o.y = scm.eval_y(o.m, o.z, o.a, o.w, static_cast<std::size_t>(rng.categorical(scm.noise_y)));
  });
  return d;
}

}  // namespace pathflux
