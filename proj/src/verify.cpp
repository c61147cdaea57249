#include "pathflux/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pathflux/counterfactual.hpp"
#include "pathflux/eif.hpp"
#include "pathflux/error.hpp"
#include "pathflux/identification.hpp"
#include "pathflux/io.hpp"
#include "pathflux/joint_law.hpp"
#include "pathflux/parallel.hpp"
#include "pathflux/rng.hpp"

namespace pathflux {

std::string path_name(PathId p) {
  switch (p) {
    case PathId::total: return "total";
    case PathId::p1: return "P1";
    case PathId::p2: return "P2";
    case PathId::p3: return "P3";
    case PathId::p4: return "P4";
  }
  return "?";
}

PathId parse_path(const std::string& s) {
  if (s == "total") return PathId::total;
  if (s == "P1" || s == "p1") return PathId::p1;
  if (s == "P2" || s == "p2") return PathId::p2;
  if (s == "P3" || s == "p3") return PathId::p3;
  if (s == "P4" || s == "p4") return PathId::p4;
  throw ValidationError("unknown path '" + s + "'");
}

namespace {

std::vector<double> random_pmf(CounterRng& rng, std::size_t k) {
  std::vector<double> p(k);
  double s = 0.0;
  for (double& v : p) {
    v = rng.uniform(0.05, 1.0);
    s += v;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    p[i] /= s;
    acc += p[i];
  }
  p[k - 1] = 1.0 - acc;
  return p;
}

// Outputs for one parent configuration: every level appears at least once.
std::vector<int> surjective_row(CounterRng& rng, std::size_t support, int card) {
  std::vector<int> row(support);
  for (std::size_t u = 0; u < support; ++u)
    row[u] = u < static_cast<std::size_t>(card) ? static_cast<int>(u) : static_cast<int>(rng.below(card));
  for (std::size_t i = support; i > 1; --i) std::swap(row[i - 1], row[rng.below(i)]);
  return row;
}

// Sorts a flat table along one axis. dims lists axis sizes, slowest first.
template <class T>
void sort_axis(std::vector<T>& t, const std::vector<int>& dims, std::size_t axis) {
  std::size_t stride = 1;
  for (std::size_t d = axis + 1; d < dims.size(); ++d) stride *= dims[d];
  const std::size_t len = dims[axis];
  const std::size_t block = stride * len;
  std::vector<T> line(len);
  for (std::size_t base = 0; base < t.size(); base += block)
    for (std::size_t off = 0; off < stride; ++off) {
      for (std::size_t k = 0; k < len; ++k) line[k] = t[base + off + k * stride];
      std::sort(line.begin(), line.end());
      for (std::size_t k = 0; k < len; ++k) t[base + off + k * stride] = line[k];
    }
}

}  // namespace

DiscreteScm random_scm(std::uint64_t seed, const ScmConstraint& con, const RandomScmOptions& opts) {
  CounterRng rng(seed, 0x53434dULL);
  const int mc = std::max(1, opts.max_card);
  const int ms = std::max(1, opts.max_support);
  auto card_in = [&](int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(hi - lo, 0) + 1))); };
  DiscreteScm s;
  Cards& c = s.cards;
  c.w = card_in(1, mc);
  c.a = con.binary_a ? 2 : card_in(2, std::max(2, mc));
  c.z = con.kind == ScmConstraint::Kind::degenerate_z ? 1 : card_in(2, std::max(2, mc));
  c.m = card_in(2, std::max(2, mc));
  auto support_for = [&](int card) { return static_cast<std::size_t>(card_in(card, std::max(card, ms))); };
  s.noise_w = random_pmf(rng, support_for(c.w));
  s.noise_a = random_pmf(rng, support_for(c.a));
  s.noise_z = random_pmf(rng, support_for(c.z));
  s.noise_m = random_pmf(rng, support_for(c.m));
  s.noise_y = random_pmf(rng, static_cast<std::size_t>(card_in(1, ms)));

  const bool drop = con.kind == ScmConstraint::Kind::drop_path;
  // P2 is excluded either at f_Y (no Z argument) or at f_Z (no A argument).
  const bool p2_at_y = (seed % 2) == 0;
  const bool y_const_a = drop && con.path == PathId::p1;
  const bool y_const_z = drop && con.path == PathId::p2 && p2_at_y;
  const bool z_const_a = drop && con.path == PathId::p2 && !p2_at_y;
  const bool m_const_z = drop && con.path == PathId::p3;
  const bool m_const_a = drop && con.path == PathId::p4;

  s.f_w = surjective_row(rng, s.support_w(), c.w);
  for (int w = 0; w < c.w; ++w) {
    const auto row = surjective_row(rng, s.support_a(), c.a);
    s.f_a.insert(s.f_a.end(), row.begin(), row.end());
  }
  s.f_z.resize(c.aw_cells() * s.support_z());
  for (int a = 0; a < c.a; ++a)
    for (int w = 0; w < c.w; ++w) {
      const std::size_t base = (static_cast<std::size_t>(a) * c.w + w) * s.support_z();
      if (z_const_a && a > 0) {
        std::copy_n(s.f_z.begin() + static_cast<std::ptrdiff_t>(w * s.support_z()), s.support_z(), s.f_z.begin() + static_cast<std::ptrdiff_t>(base));
        continue;
      }
      const auto row = surjective_row(rng, s.support_z(), c.z);
      std::copy(row.begin(), row.end(), s.f_z.begin() + static_cast<std::ptrdiff_t>(base));
    }
  s.f_m.resize(c.zaw_cells() * s.support_m());
  auto m_index = [&](int z, int a, int w) { return ((static_cast<std::size_t>(z) * c.a + a) * c.w + w) * s.support_m(); };
  for (int z = 0; z < c.z; ++z)
    for (int a = 0; a < c.a; ++a)
      for (int w = 0; w < c.w; ++w) {
        const std::size_t base = m_index(z, a, w);
        std::size_t src = base;
        if (m_const_z && z > 0) src = m_index(0, a, w);
        if (m_const_a && a > 0) src = m_index(z, 0, w);
        if (src != base) {
          std::copy_n(s.f_m.begin() + static_cast<std::ptrdiff_t>(src), s.support_m(), s.f_m.begin() + static_cast<std::ptrdiff_t>(base));
          continue;
        }
        const auto row = surjective_row(rng, s.support_m(), c.m);
        std::copy(row.begin(), row.end(), s.f_m.begin() + static_cast<std::ptrdiff_t>(base));
      }
  s.f_y.resize(c.cells() * s.support_y());
  auto y_index = [&](int m, int z, int a, int w) {
    return (((static_cast<std::size_t>(m) * c.z + z) * c.a + a) * c.w + w) * s.support_y();
  };
  for (int m = 0; m < c.m; ++m)
    for (int z = 0; z < c.z; ++z)
      for (int a = 0; a < c.a; ++a)
        for (int w = 0; w < c.w; ++w) {
          const std::size_t base = y_index(m, z, a, w);
          std::size_t src = base;
          if (y_const_a && a > 0) src = y_index(m, z, 0, w);
          if (y_const_z && z > 0) src = y_index(m, 0, a, w);
          for (std::size_t u = 0; u < s.support_y(); ++u)
            s.f_y[base + u] = src != base ? s.f_y[src + u] : std::round(rng.uniform(-2.0, 2.0) * 1000.0) / 1000.0;
        }

  if (con.kind == ScmConstraint::Kind::monotone) {
    const int sw = static_cast<int>(s.support_w());
    (void)sw;
    const std::vector<int> dz{c.a, c.w, static_cast<int>(s.support_z())};
    const std::vector<int> dm{c.z, c.a, c.w, static_cast<int>(s.support_m())};
    const std::vector<int> dy{c.m, c.z, c.a, c.w, static_cast<int>(s.support_y())};
    switch (con.path) {
      case PathId::total:
        sort_axis(s.f_z, dz, 0);
        sort_axis(s.f_m, dm, 0);
        sort_axis(s.f_m, dm, 1);
        sort_axis(s.f_y, dy, 0);
        sort_axis(s.f_y, dy, 1);
        sort_axis(s.f_y, dy, 2);
        break;
      case PathId::p1:
        sort_axis(s.f_y, dy, 2);
        break;
      case PathId::p2:
        sort_axis(s.f_z, dz, 0);
        sort_axis(s.f_y, dy, 1);
        break;
      case PathId::p3:
        sort_axis(s.f_z, dz, 0);
        sort_axis(s.f_m, dm, 0);
        sort_axis(s.f_y, dy, 0);
        break;
      case PathId::p4:
        sort_axis(s.f_m, dm, 1);
        sort_axis(s.f_y, dy, 0);
        break;
    }
  }
  validate(s);
  return s;
}

std::string experiment_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::sharp_null: return "sharp_null";
    case ExperimentKind::monotonicity: return "monotonicity";
    case ExperimentKind::additivity: return "additivity";
    case ExperimentKind::prop_zero: return "prop_zero";
    case ExperimentKind::vonmises: return "vonmises";
    case ExperimentKind::coverage: return "coverage";
    case ExperimentKind::clt_scaling: return "clt_scaling";
    case ExperimentKind::oracle_identification: return "oracle_identification";
    case ExperimentKind::law_equality: return "law_equality";
    case ExperimentKind::report_check: return "report_check";
  }
  return "?";
}

ExperimentKind parse_experiment(const std::string& s) {
  for (auto k : {ExperimentKind::sharp_null, ExperimentKind::monotonicity, ExperimentKind::additivity,
                 ExperimentKind::prop_zero, ExperimentKind::vonmises, ExperimentKind::coverage,
                 ExperimentKind::clt_scaling, ExperimentKind::oracle_identification, ExperimentKind::law_equality,
                 ExperimentKind::report_check})
    if (experiment_name(k) == s) return k;
  throw ValidationError("unknown experiment kind '" + s + "'");
}

void validate(const ExperimentSpec& spec) {
  if (spec.replications < 1) throw ValidationError("replications must be at least 1");
  for (std::size_t i = 1; i < spec.n_grid.size(); ++i)
    if (spec.n_grid[i] <= spec.n_grid[i - 1]) throw ValidationError("n_grid must be increasing");
  const bool needs_n = spec.kind == ExperimentKind::coverage || spec.kind == ExperimentKind::clt_scaling ||
                       (spec.kind == ExperimentKind::report_check && spec.data_path.empty());
  if (needs_n && spec.n_grid.empty()) throw ValidationError(experiment_name(spec.kind) + " needs a nonempty n_grid");
  if (spec.kind == ExperimentKind::clt_scaling && spec.n_grid.size() < 2)
    throw ValidationError("clt_scaling needs at least two sample sizes");
  if (spec.kind == ExperimentKind::vonmises && !spec.target.has_gradient())
    throw ValidationError("vonmises needs a gradient target, got " + spec.target.name());
  if ((spec.kind == ExperimentKind::sharp_null) && spec.path == PathId::total)
    throw ValidationError("sharp_null needs a single path");
}

NuisanceSet random_direction(const NuisanceSet& base, std::uint64_t seed) {
  const Cards& c = base.cards;
  CounterRng rng(seed, 0x444952ULL);
  NuisanceSet d = NuisanceSet::undefined(c);
  // Multiplicative tilt with density ratio in [1/2, 3/2] per conditional.
  auto tilt = [&](const MaskedTable& src, MaskedTable& t, std::size_t groups, std::size_t k) {
    for (std::size_t g = 0; g < groups; ++g) {
      std::vector<double> p(k);
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        p[i] = src.values[g * k + i] * (1.0 + 0.5 * rng.uniform(-1.0, 1.0));
        s += p[i];
      }
      for (std::size_t i = 0; i < k; ++i) t.set(g * k + i, p[i] / s);
    }
  };
  tilt(base.p_a, d.p_a, static_cast<std::size_t>(c.w), c.a);
  tilt(base.p_z, d.p_z, c.aw_cells(), c.z);
  tilt(base.p_m, d.p_m, c.zaw_cells(), c.m);
  for (std::size_t i = 0; i < c.cells(); ++i) d.m_hat.set(i, base.m_hat.values[i] + rng.uniform(-1.0, 1.0));
  return d;
}

namespace {

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

// E_P[phi-bar(X; eta)] with the expectation taken exactly over the joint law.
double population_mean(const JointLaw& law, const EifTable& tab) {
  const Cards& c = law.cards;
  double s = 0.0;
  for (std::size_t i = 0; i < c.cells(); ++i) {
    if (law.prob[i] <= 0.0) continue;
    if (!tab.ok[i]) throw NumericalGuardError("gradient undefined on a positive-mass cell");
    s += law.prob[i] * (tab.weight[i] * (law.y_mean[i] - tab.m_hat[i]) + tab.rest[i]);
  }
  return s;
}

}  // namespace

RemainderCurve vonmises_curve(const DiscreteScm& scm, TargetId t, const Weight& f, const NuisanceSet& direction,
                              const std::vector<double>& eps_grid, PerturbMask mask) {
  const JointLaw law = enumerate_joint(scm);
  const NuisanceSet eta_p = derived_conditionals(law);
  const double tau_p = oracle_tau(scm, t, f);
  RemainderCurve rc;
  for (double eps : eps_grid) {
    const NuisanceSet eta_g = perturb(eta_p, direction, eps, mask);
    const EifTable tab = eif_table(eta_g, GradientTarget{t, f});
    rc.eps.push_back(eps);
    rc.remainder.push_back(std::abs(population_mean(law, tab) - tau_p));
  }
  bool positive = rc.remainder.size() >= 2;
  for (double r : rc.remainder) positive = positive && r > 0.0;
  rc.slope = positive ? slope(rc.eps, rc.remainder) : std::nan("");
  return rc;
}

namespace {

DiscreteScm scm_for_rep(const ExperimentSpec& spec, std::size_t rep, const ScmConstraint& con) {
  switch (spec.scm.kind) {
    case ScmSource::Kind::builtin: return builtin_scm(spec.scm.name);
    case ScmSource::Kind::file: return load_scm(spec.scm.name);
    case ScmSource::Kind::random: return random_scm(derive_seed(spec.seed, rep), con);
  }
  return builtin_scm("t1");
}

double path_value(const PathComponents& pc, PathId p) {
  switch (p) {
    case PathId::total: return pc.theta;
    case PathId::p1: return pc.p1;
    case PathId::p2: return pc.p2;
    case PathId::p3: return pc.p3;
    case PathId::p4: return pc.p4;
  }
  return 0.0;
}

double ate_path_value(const AteComponents& ac, PathId p) {
  switch (p) {
    case PathId::total: return ac.psi;
    case PathId::p1: return ac.p1;
    case PathId::p2: return ac.p2;
    case PathId::p3: return ac.p3;
    case PathId::p4: return ac.p4;
  }
  return 0.0;
}

using Row = std::map<std::string, double>;

// Runs fn over replications in parallel, keeping output in replication order.
template <class Fn>
std::vector<Row> replicate(std::size_t reps, Fn&& fn) {
  std::vector<Row> rows(reps);
  parallel_for(reps, [&](std::size_t r) { rows[r] = fn(r); });
  return rows;
}

double max_of(const std::vector<Row>& rows, const std::string& key) {
  double m = 0.0;
  for (const auto& r : rows) {
    const auto it = r.find(key);
    if (it != r.end()) m = std::max(m, it->second);
  }
  return m;
}

double min_of(const std::vector<Row>& rows, const std::string& key) {
  double m = INFINITY;
  for (const auto& r : rows) {
    const auto it = r.find(key);
    if (it != r.end()) m = std::min(m, it->second);
  }
  return m;
}

const char* kParamNames[6] = {"theta", "P1", "P2", "P3", "P4", "P2_or_P3"};

std::array<double, 6> as_array(const PathComponents& p) { return {p.theta, p.p1, p.p2, p.p3, p.p4, p.p2_or_p3}; }
std::array<const EstimateReport*, 6> as_array(const DecompositionReport& d) {
  return {&d.theta, &d.p1, &d.p2, &d.p3, &d.p4, &d.p2_or_p3};
}

EstimatorConfig rep_config(const ExperimentSpec& spec, std::size_t rep) {
  EstimatorConfig cfg = spec.estimator;
  cfg.seed = derive_seed(spec.seed ^ 0x9e3779b97f4a7c15ULL, rep);
  return cfg;
}

Dataset rep_data(const ExperimentSpec& spec, const DiscreteScm& scm, std::size_t n, std::size_t rep) {
  return sample(scm, n, derive_seed(spec.seed, 1000003ULL * n + rep));
}

ExperimentReport run_structural(const ExperimentSpec& spec) {
  ExperimentReport rep;
  rep.kind = experiment_name(spec.kind);
  const double tol = 1e-12;
  std::string key;
  ScmConstraint con;
  switch (spec.kind) {
    case ExperimentKind::sharp_null:
      con.kind = ScmConstraint::Kind::drop_path;
      con.path = spec.path;
      key = "abs_contrast";
      break;
    case ExperimentKind::prop_zero:
      con.kind = ScmConstraint::Kind::degenerate_z;
      key = "abs_contrast";
      break;
    case ExperimentKind::monotonicity:
      con.kind = ScmConstraint::Kind::monotone;
      con.path = spec.path;
      key = "contrast";
      break;
    default:
      key = "abs_gap";
      break;
  }
  rep.replications = replicate(spec.replications, [&](std::size_t r) {
    ScmConstraint cr = con;
    cr.binary_a = (r % 2) == 0;
    const DiscreteScm scm = scm_for_rep(spec, r, cr);
    const PathComponents pc = oracle_path_decomposition(scm);
    const bool binary = scm.cards.a == 2;
    Row row;
    row["card_a"] = scm.cards.a;
    row["card_z"] = scm.cards.z;
    switch (spec.kind) {
      case ExperimentKind::sharp_null:
        row["theta_path"] = path_value(pc, spec.path);
        row["abs_contrast"] = std::abs(path_value(pc, spec.path));
        if (binary) {
          const double v = ate_path_value(oracle_ate_decomposition(scm), spec.path);
          row["psi_path"] = v;
          row["abs_contrast"] = std::max(row["abs_contrast"], std::abs(v));
        }
        break;
      case ExperimentKind::prop_zero:
        row["theta_p2_or_p3"] = pc.p2_or_p3;
        row["abs_contrast"] = std::abs(pc.p2_or_p3);
        if (binary) {
          const double v = oracle_ate_decomposition(scm).p2_or_p3;
          row["psi_p2_or_p3"] = v;
          row["abs_contrast"] = std::max(row["abs_contrast"], std::abs(v));
        }
        break;
      case ExperimentKind::monotonicity:
        row["contrast"] = path_value(pc, spec.path);
        break;
      default: {
        row["abs_gap"] = std::abs(pc.additivity_gap());
        if (binary) row["abs_gap"] = std::max(row["abs_gap"], std::abs(oracle_ate_decomposition(scm).additivity_gap()));
        break;
      }
    }
    return row;
  });
  if (spec.kind == ExperimentKind::monotonicity) {
    const double lo = min_of(rep.replications, key);
    rep.aggregate["min_contrast"] = lo;
    rep.tolerances["min_contrast_floor"] = -tol;
    rep.pass = lo >= -tol;
  } else {
    const double hi = max_of(rep.replications, key);
    rep.aggregate["max_" + key] = hi;
    rep.tolerances["max_" + key] = tol;
    rep.pass = hi <= tol;
  }
  return rep;
}

ExperimentReport run_oracle_identification(const ExperimentSpec& spec) {
  ExperimentReport rep;
  rep.kind = experiment_name(spec.kind);
  const double tol = 1e-10;
  rep.replications = replicate(spec.replications, [&](std::size_t r) {
    ScmConstraint con;
    con.binary_a = (r % 2) == 0;
    const DiscreteScm scm = scm_for_rep(spec, r, con);
    const JointLaw law = enumerate_joint(scm);
    const NuisanceSet eta = derived_conditionals(law);
    const WMarginal wm = w_marginal(law);
    const auto laws = ctf_laws(scm);
    double worst = 0.0;
    for (const Weight& f : {Weight::identity(scm.cards.a), Weight::unit(scm.cards.a)})
      for (std::size_t k = 0; k < 8; ++k)
        worst = std::max(worst, std::abs(identify_tau(eta, wm, kAllTargets[k], f) - laws[k].weighted_mean(f)));
    Row row;
    row["max_abs_diff"] = worst;
    if (scm.cards.a == 2) {
      const auto a = identify_ate_means(eta, wm);
      const auto b = oracle_ate_means(scm);
      double w2 = 0.0;
      for (std::size_t k = 0; k < 8; ++k) w2 = std::max(w2, std::abs(a[k] - b[k]));
      row["max_abs_diff_ate"] = w2;
      row["max_abs_diff"] = std::max(worst, w2);
    }
    return row;
  });
  rep.aggregate["max_abs_diff"] = max_of(rep.replications, "max_abs_diff");
  rep.tolerances["max_abs_diff"] = tol;
  rep.pass = rep.aggregate["max_abs_diff"] <= tol;
  return rep;
}

ExperimentReport run_law_equality(const ExperimentSpec& spec) {
  ExperimentReport rep;
  rep.kind = experiment_name(spec.kind);
  const double tol = 1e-12;
  rep.replications = replicate(spec.replications, [&](std::size_t r) {
    ScmConstraint con;
    con.binary_a = (r % 2) == 0;
    const DiscreteScm scm = scm_for_rep(spec, r, con);
    const auto laws = ctf_laws(scm);
    const CtfLaw& l1 = laws[target_index(kS2Emulated)];
    const CtfLaw& l2 = laws[target_index(kS2Removed)];
    double worst = 0.0;
    for (std::size_t a = 0; a < l1.p_a.size(); ++a) {
      worst = std::max(worst, std::abs(l1.p_a[a] - l2.p_a[a]));
      std::map<double, double> all = l1.y_given_a[a];
      for (const auto& [y, p] : l2.y_given_a[a]) all.emplace(y, 0.0);
      for (const auto& [y, unused] : all) {
        const auto i1 = l1.y_given_a[a].find(y);
        const auto i2 = l2.y_given_a[a].find(y);
        const double p1 = i1 == l1.y_given_a[a].end() ? 0.0 : i1->second;
        const double p2 = i2 == l2.y_given_a[a].end() ? 0.0 : i2->second;
        worst = std::max(worst, std::abs(p1 - p2));
      }
    }
    return Row{{"max_cell_diff", worst}};
  });
  rep.aggregate["max_cell_diff"] = max_of(rep.replications, "max_cell_diff");
  rep.tolerances["max_cell_diff"] = tol;
  rep.pass = rep.aggregate["max_cell_diff"] <= tol;
  return rep;
}

ExperimentReport run_vonmises(const ExperimentSpec& spec) {
  ExperimentReport rep;
  rep.kind = experiment_name(spec.kind);
  const std::vector<double> grid{0.4, 0.2, 0.1, 0.05};
  const double min_slope = 1.8, mixed_tol = 1e-10, exact_tol = 1e-12;
  double worst_slope = INFINITY, worst_mixed = 0.0;
  for (std::size_t r = 0; r < spec.replications; ++r) {
    const DiscreteScm scm = scm_for_rep(spec, r, ScmConstraint{});
    const NuisanceSet dir = random_direction(derived_conditionals(enumerate_joint(scm)), derive_seed(spec.seed, r));
    for (const Weight& f : {Weight::identity(scm.cards.a), Weight::unit(scm.cards.a)}) {
      const RemainderCurve rc = vonmises_curve(scm, spec.target, f, dir, grid);
      Row row;
      row["weight_identity"] = f.name() == "identity" ? 1.0 : 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) row["remainder_eps_" + std::to_string(grid[i]).substr(0, 4)] = rc.remainder[i];
      // A remainder at rounding level means the functional is linear along this path.
      const bool exact = *std::max_element(rc.remainder.begin(), rc.remainder.end()) <= exact_tol;
      row["exact"] = exact ? 1.0 : 0.0;
      if (!exact) {
        row["slope"] = rc.slope;
        worst_slope = std::isnan(rc.slope) ? -INFINITY : std::min(worst_slope, rc.slope);
      }
      PerturbMask only_m{true, false, false, false};
      const RemainderCurve mixed = vonmises_curve(scm, spec.target, f, dir, grid, only_m);
      const double mb = *std::max_element(mixed.remainder.begin(), mixed.remainder.end());
      row["mixed_bias_max"] = mb;
      worst_mixed = std::max(worst_mixed, mb);
      rep.replications.push_back(row);
    }
  }
  rep.aggregate["min_slope"] = worst_slope;
  rep.aggregate["max_mixed_bias"] = worst_mixed;
  rep.tolerances["min_slope"] = min_slope;
  rep.tolerances["max_mixed_bias"] = mixed_tol;
  rep.tolerances["exact_remainder"] = exact_tol;
  rep.pass = worst_slope >= min_slope && worst_mixed <= mixed_tol;
  return rep;
}

ExperimentReport run_coverage(const ExperimentSpec& spec) {
  ExperimentReport rep;
  rep.kind = experiment_name(spec.kind);
  const double lo = 0.90, hi = 0.99;
  const std::size_t n = spec.n_grid.back();
  const DiscreteScm scm = scm_for_rep(spec, 0, ScmConstraint{});
  const auto truth = as_array(oracle_path_decomposition(scm));
  rep.replications = replicate(spec.replications, [&](std::size_t r) {
    const Dataset d = rep_data(spec, scm, n, r);
    const DecompositionReport dr = decompose_paths(d, rep_config(spec, r));
    const auto est = as_array(dr);
    Row row;
    for (std::size_t k = 0; k < 6; ++k) {
      row[std::string("point_") + kParamNames[k]] = est[k]->point;
      row[std::string("se_") + kParamNames[k]] = est[k]->se;
      row[std::string("covers_") + kParamNames[k]] = est[k]->ci_lo <= truth[k] && truth[k] <= est[k]->ci_hi ? 1.0 : 0.0;
    }
    row["telescoping_gap"] = std::abs(dr.telescoping_gap());
    return row;
  });
  rep.pass = true;
  for (std::size_t k = 0; k < 6; ++k) {
    double cov = 0.0;
    for (const auto& row : rep.replications) cov += row.at(std::string("covers_") + kParamNames[k]);
    cov /= static_cast<double>(rep.replications.size());
    rep.aggregate[std::string("coverage_") + kParamNames[k]] = cov;
    rep.aggregate[std::string("truth_") + kParamNames[k]] = truth[k];
    if (k < 5) rep.pass = rep.pass && cov >= lo && cov <= hi;
  }
  rep.aggregate["max_telescoping_gap"] = max_of(rep.replications, "telescoping_gap");
  rep.tolerances["coverage_lo"] = lo;
  rep.tolerances["coverage_hi"] = hi;
  rep.tolerances["telescoping_gap"] = 1e-12;
  rep.pass = rep.pass && rep.aggregate["max_telescoping_gap"] <= 1e-12;
  return rep;
}

ExperimentReport run_clt(const ExperimentSpec& spec) {
  ExperimentReport rep;
  rep.kind = experiment_name(spec.kind);
  const double lo = 1.6, hi = 2.5;
  const DiscreteScm scm = scm_for_rep(spec, 0, ScmConstraint{});
  const auto truth = as_array(oracle_path_decomposition(scm));
  std::vector<std::array<double, 6>> rmse;
  for (std::size_t n : spec.n_grid) {
    const auto rows = replicate(spec.replications, [&](std::size_t r) {
      const Dataset d = rep_data(spec, scm, n, r);
      const auto est = as_array(decompose_paths(d, rep_config(spec, r)));
      Row row;
      row["n"] = static_cast<double>(n);
      for (std::size_t k = 0; k < 6; ++k) row[std::string("err_") + kParamNames[k]] = est[k]->point - truth[k];
      return row;
    });
    std::array<double, 6> acc{};
    for (const auto& row : rows)
      for (std::size_t k = 0; k < 6; ++k) {
        const double e = row.at(std::string("err_") + kParamNames[k]);
        acc[k] += e * e;
      }
    for (auto& v : acc) v = std::sqrt(v / static_cast<double>(rows.size()));
    rmse.push_back(acc);
    for (std::size_t k = 0; k < 6; ++k)
      rep.aggregate["rmse_" + std::string(kParamNames[k]) + "_n" + std::to_string(n)] = acc[k];
    rep.replications.insert(rep.replications.end(), rows.begin(), rows.end());
  }
  rep.pass = true;
  for (std::size_t s = 0; s + 1 < spec.n_grid.size(); ++s) {
    // expected ratio sqrt(n2 / n1), 2 for a fourfold step
    for (std::size_t k = 0; k < 5; ++k) {
      const double ratio = rmse[s][k] / rmse[s + 1][k];
      rep.aggregate["rmse_ratio_" + std::string(kParamNames[k]) + "_n" + std::to_string(spec.n_grid[s])] = ratio;
      rep.pass = rep.pass && ratio >= lo && ratio <= hi;
    }
  }
  rep.tolerances["ratio_lo"] = lo;
  rep.tolerances["ratio_hi"] = hi;
  return rep;
}

ExperimentReport run_report_check(const ExperimentSpec& spec) {
  ExperimentReport rep;
  rep.kind = experiment_name(spec.kind);
  const DiscreteScm scm = scm_for_rep(spec, 0, ScmConstraint{});
  const Dataset d = spec.data_path.empty() ? rep_data(spec, scm, spec.n_grid.back(), 0) : load_csv(spec.data_path).data;
  const DecompositionReport dr = decompose_paths(d, spec.estimator);
  const auto truth = as_array(oracle_path_decomposition(scm));
  const auto est = as_array(dr);
  Row row;
  bool ok = true;
  for (std::size_t k = 0; k < 6; ++k) {
    const double z = est[k]->se > 0.0 ? std::abs(est[k]->point - truth[k]) / est[k]->se : (est[k]->point == truth[k] ? 0.0 : INFINITY);
    row[std::string("abs_z_") + kParamNames[k]] = z;
    ok = ok && z <= 4.0;
  }
  row["telescoping_gap"] = std::abs(dr.telescoping_gap());
  ok = ok && row["telescoping_gap"] <= 1e-12;
  rep.replications.push_back(row);
  rep.aggregate = row;
  rep.tolerances["abs_z"] = 4.0;
  rep.tolerances["telescoping_gap"] = 1e-12;
  rep.pass = ok;
  return rep;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  ExperimentReport rep;
  try {
    switch (spec.kind) {
      case ExperimentKind::sharp_null:
      case ExperimentKind::monotonicity:
      case ExperimentKind::additivity:
      case ExperimentKind::prop_zero: rep = run_structural(spec); break;
      case ExperimentKind::oracle_identification: rep = run_oracle_identification(spec); break;
      case ExperimentKind::law_equality: rep = run_law_equality(spec); break;
      case ExperimentKind::vonmises: rep = run_vonmises(spec); break;
      case ExperimentKind::coverage: rep = run_coverage(spec); break;
      case ExperimentKind::clt_scaling: rep = run_clt(spec); break;
      case ExperimentKind::report_check: rep = run_report_check(spec); break;
    }
  } catch (const CapacityError& e) {
    throw CapacityError(experiment_name(spec.kind) + " (seed " + std::to_string(spec.seed) + "): " + e.what());
  } catch (const NumericalGuardError& e) {
    throw NumericalGuardError(experiment_name(spec.kind) + " (seed " + std::to_string(spec.seed) + "): " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(experiment_name(spec.kind) + " (seed " + std::to_string(spec.seed) + "): " + e.what());
  }
  rep.verdict = rep.pass ? "pass" : "fail";
  return rep;
}

}  // namespace pathflux
