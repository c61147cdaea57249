#include "pathflux/counterfactual.hpp"

#include <cmath>
#include <sstream>

#include "pathflux/error.hpp"

namespace pathflux {

double CtfLaw::conditional_mean(int a) const {
  double s = 0.0;
  for (const auto& [y, p] : y_given_a[static_cast<std::size_t>(a)]) s += y * p;
  return s;
}

double CtfLaw::mean() const {
  double s = 0.0;
  for (std::size_t a = 0; a < p_a.size(); ++a)
    if (p_a[a] > 0.0) s += p_a[a] * conditional_mean(static_cast<int>(a));
  return s;
}

double CtfLaw::weighted_mean(const Weight& f) const {
  double s = 0.0;
  for (std::size_t a = 0; a < p_a.size(); ++a)
    if (p_a[a] > 0.0) s += f(static_cast<int>(a)) * p_a[a] * conditional_mean(static_cast<int>(a));
  return s;
}

namespace {

void check_budget(const DiscreteScm& scm, std::uint64_t extra, std::uint64_t budget) {
  const std::uint64_t cells = noise_grid_size(scm) * extra;
  if (cells > budget) {
    std::ostringstream os;
    os << "augmented enumeration grid has " << cells << " cells, budget is " << budget;
    throw CapacityError(os.str());
  }
}

// Mass of (A, argument tuple of f_Y) per target, pushed through U_Y at the end.
struct ArgTable {
  Cards c;
  std::vector<double> mass;  // [a_obs][cell(w, a_y, z_y, m_y)]

  explicit ArgTable(const Cards& cards) : c(cards), mass(static_cast<std::size_t>(cards.a) * cards.cells(), 0.0) {}
  void add(int a_obs, int w, int a_y, int z_y, int m_y, double p) {
    mass[static_cast<std::size_t>(a_obs) * c.cells() + c.cell(w, a_y, z_y, m_y)] += p;
  }
};

CtfLaw push_through_y(const DiscreteScm& scm, const ArgTable& t) {
  const Cards& c = scm.cards;
  CtfLaw law;
  law.p_a.assign(c.a, 0.0);
  law.y_given_a.resize(c.a);
  for (int a = 0; a < c.a; ++a) {
    auto& pmf = law.y_given_a[a];
    for (int w = 0; w < c.w; ++w)
      for (int ay = 0; ay < c.a; ++ay)
        for (int z = 0; z < c.z; ++z)
          for (int m = 0; m < c.m; ++m) {
            const double p = t.mass[static_cast<std::size_t>(a) * c.cells() + c.cell(w, ay, z, m)];
            if (p <= 0.0) continue;
            law.p_a[a] += p;
            for (std::size_t u = 0; u < scm.support_y(); ++u) {
              if (scm.noise_y[u] <= 0.0) continue;
              pmf[scm.eval_y(m, z, ay, w, u)] += p * scm.noise_y[u];
            }
          }
    if (law.p_a[a] > 0.0)
      for (auto& [y, p] : pmf) p /= law.p_a[a];
    else
      pmf.clear();
  }
  return law;
}

}  // namespace

std::array<CtfLaw, 8> ctf_laws(const DiscreteScm& scm, const OracleOptions& opts) {
  validate(scm);
  const Cards& c = scm.cards;
  check_budget(scm, static_cast<std::uint64_t>(c.a) * c.z * c.z, opts.cell_budget);

  std::vector<ArgTable> tabs(8, ArgTable(c));
  const std::size_t i00 = target_index(kS0), i10 = target_index(kS1), i11 = target_index(kS1Emulated),
                    i21 = target_index(kS2Emulated), i22 = target_index(kS2Removed),
                    i32 = target_index(kS3Removed), i30 = target_index(kS3), i40 = target_index(kS4);

  std::vector<double> pa(c.a), pz(static_cast<std::size_t>(c.a) * c.z), pz_w(c.z);
  for (std::size_t uw = 0; uw < scm.support_w(); ++uw) {
    const double p_uw = scm.noise_w[uw];
    if (p_uw <= 0.0) continue;
    const int w = scm.eval_w(uw);
    for (int a = 0; a < c.a; ++a) {
      pa[a] = scm.structural_p_a(a, w);
      for (int z = 0; z < c.z; ++z) pz[static_cast<std::size_t>(a) * c.z + z] = scm.structural_p_z(z, a, w);
    }
    for (int z = 0; z < c.z; ++z) {
      pz_w[z] = 0.0;
      for (int a = 0; a < c.a; ++a) pz_w[z] += pa[a] * pz[static_cast<std::size_t>(a) * c.z + z];
    }
    for (std::size_t ua = 0; ua < scm.support_a(); ++ua) {
      const double p1 = p_uw * scm.noise_a[ua];
      if (p1 <= 0.0) continue;
      const int A = scm.eval_a(w, ua);
      for (int Ab = 0; Ab < c.a; ++Ab) {  // A-underbar
        const double p2 = p1 * pa[Ab];
        if (p2 <= 0.0) continue;
        for (std::size_t uz = 0; uz < scm.support_z(); ++uz) {
          const double p3 = p2 * scm.noise_z[uz];
          if (p3 <= 0.0) continue;
          const int zA = scm.eval_z(A, w, uz);
          const int zAb = scm.eval_z(Ab, w, uz);
          for (int ZA = 0; ZA < c.z; ++ZA) {  // emulation draw Z_A
            const double p4 = p3 * pz[static_cast<std::size_t>(A) * c.z + ZA];
            if (p4 <= 0.0) continue;
            for (int ZAb = 0; ZAb < c.z; ++ZAb) {  // removal draw Z_{A-underbar}
              const double q = opts.z_reading == ZDrawReading::coupled ? pz[static_cast<std::size_t>(Ab) * c.z + ZAb]
                                                                       : pz_w[ZAb];
              const double p5 = p4 * q;
              if (p5 <= 0.0) continue;
              for (std::size_t um = 0; um < scm.support_m(); ++um) {
                const double p = p5 * scm.noise_m[um];
                if (p <= 0.0) continue;
                const int m_AzA = scm.eval_m(zA, A, w, um);
                const int m_AZA = scm.eval_m(ZA, A, w, um);
                const int m_AzAb = scm.eval_m(zAb, A, w, um);
                const int m_AbzAb = scm.eval_m(zAb, Ab, w, um);
                tabs[i00].add(A, w, A, zA, m_AzA, p);
                tabs[i10].add(A, w, Ab, zA, m_AzA, p);
                tabs[i11].add(A, w, Ab, zA, m_AZA, p);
                tabs[i21].add(A, w, Ab, zAb, m_AZA, p);
                tabs[i22].add(A, w, Ab, ZAb, m_AzA, p);
                tabs[i32].add(A, w, Ab, ZAb, m_AzAb, p);
                tabs[i30].add(A, w, Ab, zAb, m_AzAb, p);
                tabs[i40].add(A, w, Ab, zAb, m_AbzAb, p);
              }
            }
          }
        }
      }
    }
  }
  std::array<CtfLaw, 8> out;
  for (std::size_t i = 0; i < 8; ++i) out[i] = push_through_y(scm, tabs[i]);
  return out;
}

CtfLaw ctf_law(const DiscreteScm& scm, TargetId t, const OracleOptions& opts) {
  require_valid(t);
  return ctf_laws(scm, opts)[target_index(t)];
}

double oracle_tau(const DiscreteScm& scm, TargetId t, const Weight& f, const OracleOptions& opts) {
  if (f.card() != scm.cards.a) throw ValidationError("weight has " + std::to_string(f.card()) + " levels, A has " + std::to_string(scm.cards.a));
  return ctf_law(scm, t, opts).weighted_mean(f);
}

namespace {

std::array<double, 8> covariances(const std::array<CtfLaw, 8>& laws, int card_a) {
  const Weight id = Weight::identity(card_a);
  std::array<double, 8> cov{};
  double mu_a = 0.0;
  for (int a = 0; a < card_a; ++a) mu_a += a * laws[0].p_a[a];
  for (std::size_t i = 0; i < 8; ++i) cov[i] = laws[i].weighted_mean(id) - mu_a * laws[i].mean();
  return cov;
}

}  // namespace

PathComponents oracle_path_decomposition(const DiscreteScm& scm, const OracleOptions& opts) {
  return path_components(covariances(ctf_laws(scm, opts), scm.cards.a));
}

TotalInfluence oracle_total_influence(const DiscreteScm& scm, const OracleOptions& opts) {
  const auto laws = ctf_laws(scm, opts);
  const auto cov = covariances(laws, scm.cards.a);
  TotalInfluence r;
  r.theta = cov[0] - cov[7];
  r.tau_conf = cov[7];
  r.residual_curve.assign(scm.cards.a, std::nan(""));
  for (int a = 0; a < scm.cards.a; ++a)
    if (laws[0].p_a[a] > 0.0) r.residual_curve[a] = laws[0].conditional_mean(a) - laws[7].conditional_mean(a);
  return r;
}

std::array<double, 8> oracle_ate_means(const DiscreteScm& scm, const OracleOptions& opts) {
  validate(scm);
  const Cards& c = scm.cards;
  if (c.a != 2) throw ValidationError("ATE decomposition needs binary A, got card_a = " + std::to_string(c.a));
  check_budget(scm, static_cast<std::uint64_t>(c.z) * c.z, opts.cell_budget);
  std::array<double, 8> e{};
  std::vector<double> pz1(c.z), pz0(c.z);
  for (std::size_t uw = 0; uw < scm.support_w(); ++uw) {
    const double p_uw = scm.noise_w[uw];
    if (p_uw <= 0.0) continue;
    const int w = scm.eval_w(uw);
    for (int z = 0; z < c.z; ++z) {
      pz1[z] = scm.structural_p_z(z, 1, w);
      pz0[z] = scm.structural_p_z(z, 0, w);
    }
    auto ym = [&](int m, int z, int a) { return scm.structural_y_mean(m, z, a, w); };
    for (std::size_t uz = 0; uz < scm.support_z(); ++uz) {
      const double p1 = p_uw * scm.noise_z[uz];
      if (p1 <= 0.0) continue;
      const int z1 = scm.eval_z(1, w, uz);
      const int z0 = scm.eval_z(0, w, uz);
      for (int Z1 = 0; Z1 < c.z; ++Z1)
        for (int Z0 = 0; Z0 < c.z; ++Z0) {
          const double p2 = p1 * pz1[Z1] * pz0[Z0];
          if (p2 <= 0.0) continue;
          for (std::size_t um = 0; um < scm.support_m(); ++um) {
            const double p = p2 * scm.noise_m[um];
            if (p <= 0.0) continue;
            const int m1z1 = scm.eval_m(z1, 1, w, um);
            const int m1Z1 = scm.eval_m(Z1, 1, w, um);
            const int m1z0 = scm.eval_m(z0, 1, w, um);
            const int m0z0 = scm.eval_m(z0, 0, w, um);
            e[0] += p * ym(m1z1, z1, 1);
            e[1] += p * ym(m1z1, z1, 0);
            e[2] += p * ym(m1Z1, z1, 0);
            e[3] += p * ym(m1Z1, z0, 0);
            e[4] += p * ym(m1z1, Z0, 0);
            e[5] += p * ym(m1z0, Z0, 0);
            e[6] += p * ym(m1z0, z0, 0);
            e[7] += p * ym(m0z0, z0, 0);
          }
        }
    }
  }
  return e;
}

AteComponents oracle_ate_decomposition(const DiscreteScm& scm, const OracleOptions& opts) {
  return ate_components(oracle_ate_means(scm, opts));
}

double contrast(const CtfLaw& p1, const CtfLaw& p2, ContrastKind kind) {
  const int card_a = static_cast<int>(p1.p_a.size());
  switch (kind) {
    case ContrastKind::mean_diff:
      return p1.mean() - p2.mean();
    case ContrastKind::covariance: {
      const Weight id = Weight::identity(card_a);
      double mu_a = 0.0;
      for (int a = 0; a < card_a; ++a) mu_a += a * p1.p_a[a];
      return p1.weighted_mean(id) - p2.weighted_mean(id) - mu_a * (p1.mean() - p2.mean());
    }
    case ContrastKind::kl: {
      double s = 0.0;
      for (int a = 0; a < card_a; ++a) {
        if (p1.p_a[a] <= 0.0) continue;
        const auto& q1 = p1.y_given_a[a];
        const auto& q2 = p2.y_given_a[a];
        for (const auto& [y, p] : q1) {
          if (p <= 0.0) continue;
          const auto it = q2.find(y);
          if (it == q2.end() || it->second <= 0.0) {
            std::ostringstream os;
            os << "kl contrast undefined: y=" << y << " at a=" << a << " has no mass under the second law";
            throw DomainError(os.str());
          }
          s += p1.p_a[a] * p * std::log(p / it->second);
        }
        for (const auto& [y, p] : q2) {
          if (p > 0.0 && !q1.contains(y)) {
            std::ostringstream os;
            os << "kl contrast undefined: y=" << y << " at a=" << a << " has no mass under the first law";
            throw DomainError(os.str());
          }
        }
      }
      return s;
    }
  }
  return 0.0;
}

double oracle_contrast(const DiscreteScm& scm, TargetId t1, TargetId t2, ContrastKind kind, const OracleOptions& opts) {
  require_valid(t1);
  require_valid(t2);
  const auto laws = ctf_laws(scm, opts);
  return contrast(laws[target_index(t1)], laws[target_index(t2)], kind);
}

}  // namespace pathflux
