#include "pathflux/estimator.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <map>
#include <sstream>

#include "pathflux/eif.hpp"
#include "pathflux/error.hpp"
#include "pathflux/parallel.hpp"

namespace pathflux {

namespace {

// Mean that does not depend on row order.
double stable_mean(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<double> fold_means(const std::vector<double>& v, const FoldPlan& plan) {
  std::vector<std::vector<double>> parts(plan.folds);
  for (std::size_t i = 0; i < v.size(); ++i) parts[plan.assignment[i]].push_back(v[i]);
  std::vector<double> out;
  out.reserve(plan.folds);
  for (auto& p : parts) out.push_back(stable_mean(std::move(p)));
  return out;
}

}  // namespace

void validate(const EstimatorConfig& cfg, const Dataset& data) {
  validate(data);
  if (cfg.folds < 2) throw ValidationError("fold count must be at least 2");
  if (data.size() < 2 * cfg.folds) {
    std::ostringstream os;
    os << "need at least " << 2 * cfg.folds << " rows for " << cfg.folds << " folds, got " << data.size();
    throw ValidationError(os.str());
  }
  if (!(cfg.ci_level > 0.0 && cfg.ci_level < 1.0)) throw ValidationError("ci_level must lie in (0, 1)");
  validate(cfg.nuisance, data.cards);
}

double wald_quantile(double level) {
  if (level == 0.95) return kZ95;
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("ci_level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + level / 2.0);
}

EstimateReport wald_report(double point, std::span<const double> influence, double level) {
  EstimateReport r;
  r.point = point;
  r.level = level;
  r.n = influence.size();
  const double n = static_cast<double>(influence.size());
  if (influence.size() >= 2) {
    const double m = stable_mean(std::vector<double>(influence.begin(), influence.end()));
    std::vector<double> sq(influence.size());
    for (std::size_t i = 0; i < influence.size(); ++i) sq[i] = (influence[i] - m) * (influence[i] - m);
    const double var = stable_mean(std::move(sq)) * n / (n - 1.0);
    r.se = std::sqrt(var / n);
  }
  const double q = wald_quantile(level);
  r.ci_lo = point - q * r.se;
  r.ci_hi = point + q * r.se;
  return r;
}

double DecompositionReport::telescoping_gap() const {
  return theta.point - (p1.point + p2.point + p3.point + p4.point + p2_or_p3.point);
}

double AteReport::telescoping_gap() const {
  return psi.point - (p1.point + p2.point + p3.point + p4.point + p2_or_p3.point);
}

CrossFit cross_fit(const Dataset& data, const EstimatorConfig& cfg) {
  validate(cfg, data);
  CrossFit cf;
  cf.plan = make_folds(data.size(), cfg.folds, cfg.seed);
  const std::size_t V = cfg.folds;
  for (std::size_t v = 0; v < V; ++v) {
    std::vector<std::uint8_t> seen(data.cards.a, 0);
    for (std::size_t i = 0; i < data.size(); ++i)
      if (cf.plan.assignment[i] != v) seen[data.rows[i].a] = 1;
    for (int a = 0; a < data.cards.a; ++a)
      if (!seen[a]) {
        std::ostringstream os;
        os << "overlap violation: training set of fold " << v + 1 << " has no rows with A=" << a;
        throw NumericalGuardError(os.str());
      }
  }
  cf.etas.resize(V);
  parallel_for(V, [&](std::size_t v) {
    const auto rows = cf.plan.training_rows(v);
    cf.etas[v] = fit_nuisance(data, cfg.nuisance, rows);
  });
  return cf;
}

namespace {

std::vector<double> table_values(const Dataset& data, const CrossFit& cf, const std::vector<EifTable>& tabs) {
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t v = cf.plan.assignment[i];
    try {
      out[i] = tabs[v](data.rows[i]);
    } catch (const NumericalGuardError& e) {
      std::ostringstream os;
      os << "fold " << v + 1 << ", row " << i << ": " << e.what();
      throw NumericalGuardError(os.str());
    }
  }
  return out;
}

}  // namespace

std::vector<double> gradient_values(const Dataset& data, const CrossFit& cf, TargetId t, const Weight& f) {
  require_valid(t);
  if (f.card() != data.cards.a) throw ValidationError("weight levels do not match card_a");
  if (t == kS0) {
    std::vector<double> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = f(data.rows[i].a) * data.rows[i].y;
    return out;
  }
  if (t == kS2Removed) t = kS2Emulated;  // identical identified law
  std::vector<EifTable> tabs(cf.etas.size());
  parallel_for(cf.etas.size(), [&](std::size_t v) { tabs[v] = eif_table(cf.etas[v], GradientTarget{t, f}); });
  return table_values(data, cf, tabs);
}

namespace {

EstimateReport report_from_values(const std::vector<double>& vals, const CrossFit& cf, double level) {
  const double point = stable_mean(vals);
  std::vector<double> inf(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) inf[i] = vals[i] - point;
  EstimateReport r = wald_report(point, inf, level);
  r.folds = cf.plan.folds;
  r.fold_points = fold_means(vals, cf.plan);
  return r;
}

// Per-target covariance pieces for the path decomposition.
struct CovarianceRun {
  double mu_a = 0.0;
  std::array<double, 8> cov{};
  std::array<std::vector<double>, 8> inf;
  std::array<std::vector<double>, 8> phi_a, phi_1;
};

CovarianceRun covariance_run(const Dataset& data, const CrossFit& cf) {
  const Weight id = Weight::identity(data.cards.a), unit = Weight::unit(data.cards.a);
  const std::size_t n = data.size();
  CovarianceRun r;
  std::vector<double> a_vals(n);
  for (std::size_t i = 0; i < n; ++i) a_vals[i] = data.rows[i].a;
  r.mu_a = stable_mean(a_vals);
  for (std::size_t k = 0; k < 8; ++k) {
    const TargetId t = kAllTargets[k];
    if (t == kS2Removed) {
      r.phi_a[k] = r.phi_a[target_index(kS2Emulated)];
      r.phi_1[k] = r.phi_1[target_index(kS2Emulated)];
    } else {
      r.phi_a[k] = gradient_values(data, cf, t, id);
      r.phi_1[k] = gradient_values(data, cf, t, unit);
    }
    const double tau_a = stable_mean(r.phi_a[k]);
    const double tau_1 = stable_mean(r.phi_1[k]);
    r.cov[k] = tau_a - r.mu_a * tau_1;
    r.inf[k].resize(n);
    for (std::size_t i = 0; i < n; ++i)
      r.inf[k][i] = covariance_if(a_vals[i], CovarianceComponents{tau_a, tau_1, r.phi_a[k][i], r.phi_1[k][i]}, r.mu_a);
  }
  return r;
}

// Coefficients of each reported contrast on the eight per-target quantities.
using Combo = std::array<double, 8>;
constexpr Combo kTheta{1, 0, 0, 0, 0, 0, 0, -1};
constexpr Combo kP1{1, -1, 0, 0, 0, 0, 0, 0};
constexpr Combo kP2{0, 0, 1, -1, 0, 0, 0, 0};
constexpr Combo kP3{0, 0, 0, 0, 1, -1, 0, 0};
constexpr Combo kP4{0, 0, 0, 0, 0, 0, 1, -1};
constexpr Combo kP23{0, 1, -1, 1, -1, 1, -1, 0};

std::vector<double> combine(const std::array<std::vector<double>, 8>& parts, const Combo& w) {
  std::vector<double> out(parts[0].size(), 0.0);
  for (std::size_t k = 0; k < 8; ++k)
    if (w[k] != 0.0)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[k] * parts[k][i];
  return out;
}

// Contrast computed fold by fold from fold-level means.
std::vector<double> fold_contrasts(const Dataset& data, const CrossFit& cf, const CovarianceRun& r, const Combo& w) {
  std::vector<double> a_vals(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) a_vals[i] = data.rows[i].a;
  const auto mu = fold_means(a_vals, cf.plan);
  std::vector<double> out(cf.plan.folds, 0.0);
  for (std::size_t k = 0; k < 8; ++k) {
    if (w[k] == 0.0) continue;
    const auto ta = fold_means(r.phi_a[k], cf.plan);
    const auto t1 = fold_means(r.phi_1[k], cf.plan);
    for (std::size_t v = 0; v < out.size(); ++v) out[v] += w[k] * (ta[v] - mu[v] * t1[v]);
  }
  return out;
}

}  // namespace

EstimateReport estimate_tau(const Dataset& data, const CrossFit& cf, TargetId t, const Weight& f,
                            const EstimatorConfig& cfg) {
  return report_from_values(gradient_values(data, cf, t, f), cf, cfg.ci_level);
}

EstimateReport estimate_tau(const Dataset& data, TargetId t, const Weight& f, const EstimatorConfig& cfg) {
  require_valid(t);
  return estimate_tau(data, cross_fit(data, cfg), t, f, cfg);
}

DecompositionReport decompose_paths(const Dataset& data, const CrossFit& cf, const EstimatorConfig& cfg) {
  const CovarianceRun r = covariance_run(data, cf);
  const PathComponents pc = path_components(r.cov);
  auto make = [&](double point, const Combo& w) {
    EstimateReport e = wald_report(point, combine(r.inf, w), cfg.ci_level);
    e.folds = cf.plan.folds;
    e.fold_points = fold_contrasts(data, cf, r, w);
    return e;
  };
  DecompositionReport out;
  out.theta = make(pc.theta, kTheta);
  out.p1 = make(pc.p1, kP1);
  out.p2 = make(pc.p2, kP2);
  out.p3 = make(pc.p3, kP3);
  out.p4 = make(pc.p4, kP4);
  out.p2_or_p3 = make(pc.p2_or_p3, kP23);
  return out;
}

DecompositionReport decompose_paths(const Dataset& data, const EstimatorConfig& cfg) {
  return decompose_paths(data, cross_fit(data, cfg), cfg);
}

AteReport decompose_ate(const Dataset& data, const CrossFit& cf, const EstimatorConfig& cfg) {
  if (data.cards.a != 2)
    throw ValidationError("ATE decomposition needs binary A, got card_a = " + std::to_string(data.cards.a));
  std::array<std::vector<double>, 8> vals;
  for (std::size_t k = 0; k < 8; ++k) {
    const AteMean which = kAllAteMeans[k];
    if (which == AteMean::s2_double_prime) {  // same identified mean as S2'
      vals[k] = vals[k - 1];
      continue;
    }
    std::vector<EifTable> tabs(cf.etas.size());
    parallel_for(cf.etas.size(), [&](std::size_t v) { tabs[v] = chain_rule_ate_table(cf.etas[v], which); });
    vals[k] = table_values(data, cf, tabs);
  }
  std::array<double, 8> means{};
  std::array<std::vector<double>, 8> inf;
  AteReport out;
  for (std::size_t k = 0; k < 8; ++k) {
    means[k] = stable_mean(vals[k]);
    out.means[k] = report_from_values(vals[k], cf, cfg.ci_level);
    inf[k].resize(vals[k].size());
    for (std::size_t i = 0; i < vals[k].size(); ++i) inf[k][i] = vals[k][i] - means[k];
  }
  const AteComponents c = ate_components(means);
  auto make = [&](double point, const Combo& w) {
    EstimateReport e = wald_report(point, combine(inf, w), cfg.ci_level);
    e.folds = cf.plan.folds;
    e.fold_points = fold_means(combine(vals, w), cf.plan);
    return e;
  };
  out.psi = make(c.psi, kTheta);
  out.p1 = make(c.p1, kP1);
  out.p2 = make(c.p2, kP2);
  out.p3 = make(c.p3, kP3);
  out.p4 = make(c.p4, kP4);
  out.p2_or_p3 = make(c.p2_or_p3, kP23);
  return out;
}

AteReport decompose_ate(const Dataset& data, const EstimatorConfig& cfg) {
  if (data.cards.a != 2)
    throw ValidationError("ATE decomposition needs binary A, got card_a = " + std::to_string(data.cards.a));
  return decompose_ate(data, cross_fit(data, cfg), cfg);
}

TotalInfluenceReport total_influence(const Dataset& data, const CrossFit& cf, const EstimatorConfig& cfg) {
  const int A = data.cards.a;
  const std::size_t n = data.size();
  const Weight id = Weight::identity(A), unit = Weight::unit(A);
  std::vector<double> a_vals(n);
  for (std::size_t i = 0; i < n; ++i) a_vals[i] = data.rows[i].a;
  const double mu_a = stable_mean(a_vals);

  auto cov_parts = [&](TargetId t, double& cov, std::vector<double>& inf) {
    const auto pa = gradient_values(data, cf, t, id);
    const auto p1 = gradient_values(data, cf, t, unit);
    const double ta = stable_mean(pa), t1 = stable_mean(p1);
    cov = ta - mu_a * t1;
    inf.resize(n);
    for (std::size_t i = 0; i < n; ++i) inf[i] = covariance_if(a_vals[i], CovarianceComponents{ta, t1, pa[i], p1[i]}, mu_a);
  };
  double c0 = 0.0, c4 = 0.0;
  std::vector<double> i0, i4;
  cov_parts(kS0, c0, i0);
  cov_parts(kS4, c4, i4);
  std::vector<double> itheta(n);
  for (std::size_t i = 0; i < n; ++i) itheta[i] = i0[i] - i4[i];

  TotalInfluenceReport out;
  out.theta = wald_report(c0 - c4, itheta, cfg.ci_level);
  out.tau_conf = wald_report(c4, i4, cfg.ci_level);
  out.theta.folds = out.tau_conf.folds = cf.plan.folds;

  out.f_curve.resize(A);
  for (int a = 0; a < A; ++a) {
    std::vector<double> ind(n), iy(n);
    for (std::size_t i = 0; i < n; ++i) {
      ind[i] = data.rows[i].a == a ? 1.0 : 0.0;
      iy[i] = ind[i] * data.rows[i].y;
    }
    const double pi = stable_mean(ind);
    if (pi == 0.0) continue;
    const auto phi = gradient_values(data, cf, kS4, Weight::indicator(a, A));
    const double mean_iy = stable_mean(iy), tau4 = stable_mean(phi);
    const double ratio = (mean_iy - tau4) / pi;
    std::vector<double> inf(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double num = (iy[i] - mean_iy) - (phi[i] - tau4);
      inf[i] = (num - ratio * (ind[i] - pi)) / pi;
    }
    EstimateReport e = wald_report(ratio, inf, cfg.ci_level);
    e.folds = cf.plan.folds;
    out.f_curve[a] = e;
  }
  return out;
}

TotalInfluenceReport total_influence(const Dataset& data, const EstimatorConfig& cfg) {
  return total_influence(data, cross_fit(data, cfg), cfg);
}

double empirical_covariance(const Dataset& data) {
  std::vector<double> a(data.size()), y(data.size()), ay(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    a[i] = data.rows[i].a;
    y[i] = data.rows[i].y;
    ay[i] = a[i] * y[i];
  }
  return stable_mean(ay) - stable_mean(a) * stable_mean(y);
}

}  // namespace pathflux
