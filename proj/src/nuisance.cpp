#include "pathflux/nuisance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pathflux/error.hpp"
#include "pathflux/rng.hpp"

namespace pathflux {

std::vector<std::size_t> FoldPlan::prediction_rows(std::size_t fold) const {
  std::vector<std::size_t> r;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == fold) r.push_back(i);
  return r;
}

std::vector<std::size_t> FoldPlan::training_rows(std::size_t fold) const {
  std::vector<std::size_t> r;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] != fold) r.push_back(i);
  return r;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> s(folds, 0);
  for (std::size_t f : assignment) ++s[f];
  return s;
}

FoldPlan make_folds(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2 || folds > n) {
    std::ostringstream os;
    os << "fold count " << folds << " outside 2.." << n;
    throw ValidationError(os.str());
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  CounterRng rng(seed, 0x464f4c44ULL);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  FoldPlan plan;
  plan.folds = folds;
  plan.seed = seed;
  plan.assignment.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) plan.assignment[perm[pos]] = pos % folds;
  return plan;
}

std::string regression_name(RegressionKind kind) {
  return kind == RegressionKind::cell_mean ? "cell_mean" : "ridge_onehot";
}

RegressionKind parse_regression(const std::string& name) {
  if (name == "cell_mean") return RegressionKind::cell_mean;
  if (name == "ridge_onehot") return RegressionKind::ridge_onehot;
  throw ValidationError("unknown regression kind '" + name + "'");
}

void validate(const NuisanceConfig& cfg, const Cards& cards) {
  if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha)) throw ValidationError("alpha must be a finite value >= 0");
  if (!(cfg.epsilon > 0.0) || cfg.epsilon * std::max({cards.a, cards.z, cards.m}) > 1.0) {
    std::ostringstream os;
    os << "epsilon " << cfg.epsilon << " must lie in (0, 1/" << std::max({cards.a, cards.z, cards.m}) << "]";
    throw ValidationError(os.str());
  }
  if (cfg.regression == RegressionKind::ridge_onehot && !(cfg.lambda > 0.0 && std::isfinite(cfg.lambda)))
    throw ValidationError("ridge lambda must be a finite value > 0");
}

void floor_and_renormalize(std::span<double> p, double eps) {
  const std::size_t k = p.size();
  if (k == 0) return;
  double s = 0.0;
  for (double v : p) s += v;
  if (s > 0.0)
    for (double& v : p) v /= s;
  else
    for (double& v : p) v = 1.0 / static_cast<double>(k);
  if (eps <= 0.0) return;
  std::vector<std::uint8_t> pinned(k, 0);
  for (;;) {
    double free_mass = 0.0;
    std::size_t n_pinned = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (pinned[i]) ++n_pinned;
      else free_mass += p[i];
    }
    const double target = 1.0 - eps * static_cast<double>(n_pinned);
    bool changed = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (pinned[i]) {
        p[i] = eps;
        continue;
      }
      p[i] = free_mass > 0.0 ? p[i] * target / free_mass : target / static_cast<double>(k - n_pinned);
    }
    for (std::size_t i = 0; i < k; ++i)
      if (!pinned[i] && p[i] < eps) {
        pinned[i] = 1;
        changed = true;
      }
    if (!changed) break;
    if (std::all_of(pinned.begin(), pinned.end(), [](std::uint8_t b) { return b != 0; })) {
      for (double& v : p) v = 1.0 / static_cast<double>(k);
      break;
    }
  }
}

namespace {

// Sum that does not depend on the order values were collected in.
double ordered_sum(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

struct Counts {
  Cards c;
  std::vector<double> n_cell;           // (w,a,z,m)
  std::vector<std::vector<double>> ys;  // (w,a,z,m)

  Counts(const Dataset& d, std::span<const std::size_t> rows) : c(d.cards), n_cell(c.cells(), 0.0), ys(c.cells()) {
    auto add = [&](const Observation& o) {
      const std::size_t i = c.cell(o.w, o.a, o.z, o.m);
      n_cell[i] += 1.0;
      ys[i].push_back(o.y);
    };
    if (rows.empty())
      for (const auto& o : d.rows) add(o);
    else
      for (std::size_t r : rows) add(d.rows[r]);
  }
};

// Count over (w,a,z,m) restricted to the variables kept by `keep`, evaluated at cell (w,a,z,m).
struct Marginals {
  const Counts& k;
  double sum(int w, int a, int z, int m, bool kw, bool ka, bool kz, bool km) const {
    const Cards& c = k.c;
    double s = 0.0;
    for (int wi = 0; wi < c.w; ++wi) {
      if (kw && wi != w) continue;
      for (int ai = 0; ai < c.a; ++ai) {
        if (ka && ai != a) continue;
        for (int zi = 0; zi < c.z; ++zi) {
          if (kz && zi != z) continue;
          for (int mi = 0; mi < c.m; ++mi) {
            if (km && mi != m) continue;
            s += k.n_cell[c.cell(wi, ai, zi, mi)];
          }
        }
      }
    }
    return s;
  }
};

void fit_cell_mean(const Counts& k, NuisanceSet& eta) {
  const Cards& c = k.c;
  // pooled sums at decreasing resolution: (w,a,z,m) -> (w,a,z) -> (w,a) -> (w) -> all
  std::vector<double> sum_cell(c.cells(), 0.0);
  for (std::size_t i = 0; i < c.cells(); ++i) {
    std::vector<double> v = k.ys[i];
    sum_cell[i] = ordered_sum(v);
  }
  auto pooled = [&](int w, int a, int z, int depth, double& n, double& s) {
    std::vector<double> parts;
    n = 0.0;
    for (int wi = 0; wi < c.w; ++wi) {
      if (depth <= 2 && wi != w) continue;
      for (int ai = 0; ai < c.a; ++ai) {
        if (depth <= 1 && ai != a) continue;
        for (int zi = 0; zi < c.z; ++zi) {
          if (depth <= 0 && zi != z) continue;
          for (int mi = 0; mi < c.m; ++mi) {
            const std::size_t i = c.cell(wi, ai, zi, mi);
            n += k.n_cell[i];
            parts.push_back(sum_cell[i]);
          }
        }
      }
    }
    s = ordered_sum(parts);
  };
  for (int w = 0; w < c.w; ++w)
    for (int a = 0; a < c.a; ++a)
      for (int z = 0; z < c.z; ++z)
        for (int m = 0; m < c.m; ++m) {
          const std::size_t i = c.cell(w, a, z, m);
          if (k.n_cell[i] > 0.0) {
            eta.m_hat.set(i, sum_cell[i] / k.n_cell[i]);
            continue;
          }
          for (int depth = 0; depth <= 3; ++depth) {
            double n = 0.0, s = 0.0;
            pooled(w, a, z, depth, n, s);
            if (n > 0.0) {
              eta.m_hat.set(i, s / n);
              break;
            }
          }
        }
}

void fit_ridge(const Counts& k, double lambda, NuisanceSet& eta) {
  const Cards& c = k.c;
  const int cards[4] = {c.w, c.a, c.z, c.m};
  int offset[4];
  int p = 1;
  for (int v = 0; v < 4; ++v) {
    offset[v] = p;
    p += cards[v];
  }
  int pair_offset[4][4] = {};
  for (int u = 0; u < 4; ++u)
    for (int v = u + 1; v < 4; ++v) {
      pair_offset[u][v] = p;
      p += cards[u] * cards[v];
    }
  auto features = [&](int w, int a, int z, int m) {
    const int lv[4] = {w, a, z, m};
    std::vector<int> idx;
    idx.push_back(0);
    for (int v = 0; v < 4; ++v) idx.push_back(offset[v] + lv[v]);
    for (int u = 0; u < 4; ++u)
      for (int v = u + 1; v < 4; ++v) idx.push_back(pair_offset[u][v] + lv[u] * cards[v] + lv[v]);
    return idx;
  };
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(p);
  for (int w = 0; w < c.w; ++w)
    for (int a = 0; a < c.a; ++a)
      for (int z = 0; z < c.z; ++z)
        for (int m = 0; m < c.m; ++m) {
          const std::size_t i = c.cell(w, a, z, m);
          if (k.n_cell[i] == 0.0) continue;
          std::vector<double> v = k.ys[i];
          const double sy = ordered_sum(v);
          const auto idx = features(w, a, z, m);
          for (int r : idx) {
            xty(r) += sy;
            for (int s : idx) xtx(r, s) += k.n_cell[i];
          }
        }
  for (int r = 1; r < p; ++r) xtx(r, r) += lambda;
  const Eigen::VectorXd beta = xtx.ldlt().solve(xty);
  for (int w = 0; w < c.w; ++w)
    for (int a = 0; a < c.a; ++a)
      for (int z = 0; z < c.z; ++z)
        for (int m = 0; m < c.m; ++m) {
          double yhat = 0.0;
          for (int r : features(w, a, z, m)) yhat += beta(r);
          eta.m_hat.set(c.cell(w, a, z, m), yhat);
        }
}

}  // namespace

NuisanceSet fit_nuisance(const Dataset& train, const NuisanceConfig& cfg, std::span<const std::size_t> rows) {
  const Cards& c = train.cards;
  validate(cfg, c);
  if (train.rows.empty()) throw ValidationError("empty training set");
  const Counts k(train, rows);
  const Marginals mg{k};
  NuisanceSet eta = NuisanceSet::undefined(c);
  eta.floor = cfg.epsilon;
  const double alpha = cfg.alpha;

  // Smoothed conditional of `card` levels; with alpha = 0 an empty conditioning event
  // falls back to successively coarser parents.
  auto conditional = [&](int card, auto&& count_at) {
    std::vector<double> p(static_cast<std::size_t>(card));
    for (int level = 0; level < 4; ++level) {
      double tot = 0.0;
      for (int x = 0; x < card; ++x) {
        p[x] = count_at(x, level);
        tot += p[x];
      }
      if (tot + alpha * card > 0.0) {
        for (int x = 0; x < card; ++x) p[x] = (p[x] + alpha) / (tot + alpha * card);
        break;
      }
    }
    floor_and_renormalize(p, cfg.epsilon);
    return p;
  };

  for (int w = 0; w < c.w; ++w) {
    const auto pa = conditional(c.a, [&](int a, int level) { return mg.sum(w, a, 0, 0, level == 0, true, false, false); });
    for (int a = 0; a < c.a; ++a) {
      eta.p_a.set(c.aw(w, a), pa[a]);
      const auto pz = conditional(c.z, [&](int z, int level) {
        return mg.sum(w, a, z, 0, level == 0, level <= 1, true, false);
      });
      for (int z = 0; z < c.z; ++z) {
        eta.p_z.set(c.zaw(w, a, z), pz[z]);
        const auto pm = conditional(c.m, [&](int m, int level) {
          return mg.sum(w, a, z, m, level == 0, level <= 1, level <= 2, true);
        });
        for (int m = 0; m < c.m; ++m) eta.p_m.set(c.cell(w, a, z, m), pm[m]);
      }
    }
  }
  if (cfg.regression == RegressionKind::cell_mean)
    fit_cell_mean(k, eta);
  else
    fit_ridge(k, cfg.lambda, eta);
  return eta;
}

NuisanceSet perturb(const NuisanceSet& eta, const NuisanceSet& dir, double eps, PerturbMask mask) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw ValidationError("perturbation size must lie in [0, 1]");
  if (!(eta.cards == dir.cards)) throw ValidationError("perturbation direction has different cards");
  const Cards& c = eta.cards;
  NuisanceSet out = eta;
  out.floor = std::min(eta.floor, dir.floor);
  auto mix = [&](const MaskedTable& x, const MaskedTable& d, MaskedTable& o) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (eps == 0.0) continue;
      if (eps == 1.0) {
        o.values[i] = d.values[i];
        o.defined[i] = d.defined[i];
        continue;
      }
      o.values[i] = (1.0 - eps) * x.values[i] + eps * d.values[i];
      o.defined[i] = x.defined[i] && d.defined[i];
    }
  };
  auto renorm = [](MaskedTable& t, std::size_t start, std::size_t len) {
    double s = 0.0;
    for (std::size_t i = start; i < start + len; ++i) s += t.values[i];
    if (s > 0.0)
      for (std::size_t i = start; i < start + len; ++i) t.values[i] /= s;
  };
  if (mask.m_hat) mix(eta.m_hat, dir.m_hat, out.m_hat);
  if (mask.p_m) {
    mix(eta.p_m, dir.p_m, out.p_m);
    for (std::size_t g = 0; g < c.zaw_cells(); ++g) renorm(out.p_m, g * c.m, c.m);
  }
  if (mask.p_z) {
    mix(eta.p_z, dir.p_z, out.p_z);
    for (std::size_t g = 0; g < c.aw_cells(); ++g) renorm(out.p_z, g * c.z, c.z);
  }
  if (mask.p_a) {
    mix(eta.p_a, dir.p_a, out.p_a);
    for (int w = 0; w < c.w; ++w) renorm(out.p_a, static_cast<std::size_t>(w) * c.a, c.a);
  }
  return out;
}

}  // namespace pathflux
