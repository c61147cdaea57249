#include "pathflux/eif.hpp"

#include <cmath>
#include <sstream>

#include "functional.hpp"
#include "pathflux/error.hpp"

namespace pathflux {

using detail::LocalEta;

void validate(const GradientTarget& g, const Cards& cards) {
  require_valid(g.t);
  if (!g.t.has_gradient()) throw ValidationError("target " + g.t.name() + " has no canonical gradient");
  if (g.f.card() != cards.a) throw ValidationError("weight levels do not match card_a");
}

namespace {

// Per-w quantities shared by the displays.
struct Local {
  const LocalEta<double>& L;
  const Weight& f;

  double pma(int m, int a) const { return detail::pma(L, m, a); }
  double nu(int z, int m) const {  // sum_a' p_A(a') mu(a', z, m)
    double s = 0.0;
    for (int b = 0; b < L.A; ++b) s += L.PA(b) * L.MU(b, z, m);
    return s;
  }
};

double h_1_0(const Local& q, int m, int z) {
  double s = 0.0;
  for (int a = 0; a < q.L.A; ++a) s += q.f(a) * q.L.PM(m, z, a) * q.L.PZ(z, a) * q.L.PA(a);
  return s;
}
double h_1_1(const Local& q, int m, int z) {
  double s = 0.0;
  for (int a = 0; a < q.L.A; ++a) s += q.f(a) * q.L.PZ(z, a) * q.pma(m, a) * q.L.PA(a);
  return s;
}
double h_2_1(const Local& q, int m) {
  double s = 0.0;
  for (int a = 0; a < q.L.A; ++a) s += q.f(a) * q.pma(m, a) * q.L.PA(a);
  return s;
}
double h_3_2(const Local& q, int m, int ap) {
  double s = 0.0;
  for (int a = 0; a < q.L.A; ++a) {
    double mix = 0.0;
    for (int zp = 0; zp < q.L.Z; ++zp) mix += q.L.PM(m, zp, a) * q.L.PZ(zp, ap);
    s += q.f(a) * q.L.PA(a) * mix;
  }
  return s;
}
double h_3_0(const Local& q, int m, int z) {
  double s = 0.0;
  for (int a = 0; a < q.L.A; ++a) s += q.f(a) * q.L.PM(m, z, a) * q.L.PA(a);
  return s;
}
double h_4_0(const Local& q) {
  double s = 0.0;
  for (int a = 0; a < q.L.A; ++a) s += q.f(a) * q.L.PA(a);
  return s;
}

struct Affine {
  double weight = 0.0;
  double rest = 0.0;
};

// Denominators of the displayed gradient at cell (A, Z, M).
std::string guard_failure(const LocalEta<double>& L, TargetId t, int A, int Z, int M, int w, double floor) {
  const double tol = floor * (1.0 - 1e-12);
  auto low = [&](double v) { return !(v > 0.0) || v < tol; };
  std::ostringstream os;
  const double pm = L.PM(M, Z, A), pz = L.PZ(Z, A);
  const bool needs_z = t == kS1 || t == kS1Emulated || t == kS3Removed || t == kS3;
  const bool needs_m = t != kS4;
  if (needs_m && low(pm)) os << p_m_label(M, Z, A, w) << " = " << pm;
  else if (needs_z && low(pz)) os << p_z_label(Z, A, w) << " = " << pz;
  return os.str();
}

// phi-bar at cell (A, Z, M) of level w, split into residual weight and the value at y = m_hat.
Affine explicit_cell(const LocalEta<double>& L, const HFunctions& h, const GradientTarget& g, int w, int A, int Z,
                     int M) {
  const Local q{L, g.f};
  const Weight& f = g.f;
  const double G = detail::tau_integrand(L, g.t, f);
  const double pm = L.PM(M, Z, A), pz = L.PZ(Z, A);
  Affine r;
  const TargetId t = g.t;
  if (t == kS1) {
    r.weight = h.at_1_0(M, Z, w) / (pm * pz);
    double s = 0.0;
    for (int a = 0; a < L.A; ++a)
      for (int z = 0; z < L.Z; ++z)
        for (int m = 0; m < L.M; ++m) s += f(a) * L.PA(a) * L.PZ(z, a) * L.PM(m, z, a) * L.MU(A, z, m);
    r.rest = s - G + f(A) * q.nu(Z, M);
  } else if (t == kS1Emulated) {
    r.weight = h.at_1_1(M, Z, w) / (pm * pz);
    double s = 0.0, s_m = 0.0, s_z = 0.0, cm = 0.0;
    for (int a = 0; a < L.A; ++a)
      for (int z = 0; z < L.Z; ++z)
        for (int m = 0; m < L.M; ++m) s += f(a) * L.PA(a) * L.PZ(z, a) * q.pma(m, a) * L.MU(A, z, m);
    for (int m = 0; m < L.M; ++m) s_m += q.pma(m, A) * q.nu(Z, m);
    for (int z = 0; z < L.Z; ++z) s_z += L.PZ(z, A) * q.nu(z, M);
    for (int z = 0; z < L.Z; ++z)
      for (int m = 0; m < L.M; ++m) cm += L.PZ(z, A) * q.pma(m, A) * q.nu(z, m);
    r.rest = s - G + f(A) * s_m - f(A) * cm + f(A) * s_z;
  } else if (t == kS2Emulated) {
    r.weight = h.at_2_1(M, w) / pm;
    double s = 0.0, lam = 0.0;
    for (int a = 0; a < L.A; ++a)
      for (int m = 0; m < L.M; ++m) s += f(a) * L.PA(a) * q.pma(m, a) * L.MU(A, Z, m);
    for (int b = 0; b < L.A; ++b)
      for (int z = 0; z < L.Z; ++z) lam += L.MU(b, z, M) * L.PZ(z, b) * L.PA(b);
    r.rest = s - G + f(A) * lam;
  } else if (t == kS3Removed) {
    r.weight = h.at_3_2(M, A, w) / pm;
    double R = 0.0, first = 0.0, second = 0.0, T2 = 0.0, T6 = 0.0, N = 0.0;
    for (int b = 0; b < L.A; ++b)
      for (int z = 0; z < L.Z; ++z)
        for (int zp = 0; zp < L.Z; ++zp)
          for (int m = 0; m < L.M; ++m) R += L.MU(b, z, m) * L.PM(m, zp, A) * L.PZ(z, b) * L.PZ(zp, b) * L.PA(b);
    R *= f(A);
    for (int b = 0; b < L.A; ++b)
      for (int z = 0; z < L.Z; ++z) {
        first += L.MU(b, z, M) * L.PZ(z, b) * L.PZ(Z, b) * L.PA(b);
        for (int m = 0; m < L.M; ++m) second += L.MU(b, z, m) * L.PM(m, Z, A) * L.PZ(z, b) * L.PZ(Z, b) * L.PA(b);
      }
    for (int a = 0; a < L.A; ++a) {
      const double fa = f(a) * L.PA(a);
      if (fa == 0.0) continue;
      for (int zp = 0; zp < L.Z; ++zp)
        for (int m = 0; m < L.M; ++m) T2 += fa * L.MU(A, Z, m) * L.PM(m, zp, a) * L.PZ(zp, A);
      for (int z = 0; z < L.Z; ++z)
        for (int m = 0; m < L.M; ++m) T6 += fa * L.MU(A, z, m) * L.PM(m, Z, a) * L.PZ(z, A);
      for (int z = 0; z < L.Z; ++z)
        for (int zp = 0; zp < L.Z; ++zp)
          for (int m = 0; m < L.M; ++m) N += fa * L.MU(A, z, m) * L.PM(m, zp, a) * L.PZ(z, A) * L.PZ(zp, A);
    }
    r.rest = R + f(A) / pz * (first - second) + T2 + T6 - N - G;
  } else if (t == kS3) {
    r.weight = h.at_3_0(M, Z, w) / pm;
    double R0 = 0.0, first = 0.0, second = 0.0, last = 0.0;
    for (int b = 0; b < L.A; ++b)
      for (int z = 0; z < L.Z; ++z)
        for (int m = 0; m < L.M; ++m) R0 += L.MU(b, z, m) * L.PM(m, z, A) * L.PZ(z, b) * L.PA(b);
    R0 *= f(A);
    for (int b = 0; b < L.A; ++b) {
      first += L.MU(b, Z, M) * L.PZ(Z, b) * L.PA(b);
      for (int m = 0; m < L.M; ++m) second += L.MU(b, Z, m) * L.PM(m, Z, A) * L.PZ(Z, b) * L.PA(b);
    }
    for (int a = 0; a < L.A; ++a)
      for (int m = 0; m < L.M; ++m) last += f(a) * L.PA(a) * L.MU(A, Z, m) * L.PM(m, Z, a);
    r.rest = R0 + f(A) / pz * (first - second) + last - G;
  } else {  // kS4
    const double h40 = h.at_4_0(w);
    double ey = 0.0;
    for (int b = 0; b < L.A; ++b)
      for (int z = 0; z < L.Z; ++z)
        for (int m = 0; m < L.M; ++m) ey += L.PA(b) * L.PZ(z, b) * L.PM(m, z, b) * L.MU(b, z, m);
    r.weight = h40;
    r.rest = h40 * (L.MU(A, Z, M) - ey) + f(A) * ey;
  }
  return r;
}

std::string cell_text(int w, int a, int z, int m) {
  std::ostringstream os;
  os << "(w=" << w << ", a=" << a << ", z=" << z << ", m=" << m << ")";
  return os.str();
}

}  // namespace

HFunctions h_tables(const NuisanceSet& eta, const Weight& f) {
  const Cards& c = eta.cards;
  if (f.card() != c.a) throw ValidationError("weight levels do not match card_a");
  HFunctions h;
  h.cards = c;
  const std::size_t zm = static_cast<std::size_t>(c.z) * c.m;
  h.h1_0.resize(c.w * zm);
  h.h1_1.resize(c.w * zm);
  h.h3_0.resize(c.w * zm);
  h.h2_1.resize(static_cast<std::size_t>(c.w) * c.m);
  h.h3_2.resize(static_cast<std::size_t>(c.w) * c.a * c.m);
  h.h4_0.resize(c.w);
  for (int w = 0; w < c.w; ++w) {
    const auto L = detail::local_eta<double>(eta, w);
    const Local q{L, f};
    for (int z = 0; z < c.z; ++z)
      for (int m = 0; m < c.m; ++m) {
        const std::size_t i = (static_cast<std::size_t>(w) * c.z + z) * c.m + m;
        h.h1_0[i] = h_1_0(q, m, z);
        h.h1_1[i] = h_1_1(q, m, z);
        h.h3_0[i] = h_3_0(q, m, z);
      }
    for (int m = 0; m < c.m; ++m) {
      h.h2_1[static_cast<std::size_t>(w) * c.m + m] = h_2_1(q, m);
      for (int a = 0; a < c.a; ++a) h.h3_2[(static_cast<std::size_t>(w) * c.a + a) * c.m + m] = h_3_2(q, m, a);
    }
    h.h4_0[w] = h_4_0(q);
  }
  return h;
}

double eif_uncentered(const Observation& x, const NuisanceSet& eta, const GradientTarget& g, const HFunctions& h) {
  validate(g, eta.cards);
  const auto L = detail::local_eta<double>(eta, x.w);
  const std::string bad = guard_failure(L, g.t, x.a, x.z, x.m, x.w, eta.floor);
  if (!bad.empty()) throw NumericalGuardError("gradient " + g.t.name() + " at cell " + cell_text(x.w, x.a, x.z, x.m) + ": " + bad + " below the truncation floor");
  const Affine r = explicit_cell(L, h, g, x.w, x.a, x.z, x.m);
  return r.weight * (x.y - L.MU(x.a, x.z, x.m)) + r.rest;
}

double EifTable::operator()(const Observation& x) const {
  const std::size_t i = cards.cell(x.w, x.a, x.z, x.m);
  if (!ok[i])
    throw NumericalGuardError("gradient undefined at cell " + cell_text(x.w, x.a, x.z, x.m) +
                              ": a denominator is zero or below the truncation floor");
  return weight[i] * (x.y - m_hat[i]) + rest[i];
}

namespace {

EifTable empty_table(const NuisanceSet& eta) {
  EifTable t;
  t.cards = eta.cards;
  t.weight.assign(eta.cards.cells(), 0.0);
  t.rest.assign(eta.cards.cells(), 0.0);
  t.m_hat = eta.m_hat.values;
  t.ok.assign(eta.cards.cells(), 0);
  t.integrand.assign(eta.cards.w, 0.0);
  return t;
}

}  // namespace

EifTable eif_table(const NuisanceSet& eta, const GradientTarget& g) {
  validate(g, eta.cards);
  const Cards& c = eta.cards;
  const HFunctions h = h_tables(eta, g.f);
  EifTable tab = empty_table(eta);
  for (int w = 0; w < c.w; ++w) {
    const auto L = detail::local_eta<double>(eta, w);
    tab.integrand[w] = detail::tau_integrand(L, g.t, g.f);
    for (int a = 0; a < c.a; ++a)
      for (int z = 0; z < c.z; ++z)
        for (int m = 0; m < c.m; ++m) {
          if (!guard_failure(L, g.t, a, z, m, w, eta.floor).empty()) continue;
          const std::size_t i = c.cell(w, a, z, m);
          const Affine r = explicit_cell(L, h, g, w, a, z, m);
          tab.weight[i] = r.weight;
          tab.rest[i] = r.rest;
          tab.ok[i] = 1;
        }
  }
  return tab;
}

namespace {

template <class Integrand>
EifTable chain_rule(const NuisanceSet& eta, Integrand&& integrand) {
  const Cards& c = eta.cards;
  EifTable tab = empty_table(eta);
  const double tol = eta.floor * (1.0 - 1e-12);
  for (int w = 0; w < c.w; ++w) {
    auto D = detail::local_eta<detail::Dual>(eta, w);
    const auto L = detail::local_eta<double>(eta, w);
    // gradient of the per-w integrand with respect to every table entry
    std::vector<double> grad(D.entries());
    for (std::size_t e = 0; e < D.entries(); ++e) {
      D.entry(e).d = 1.0;
      grad[e] = integrand(D).d;
      D.entry(e).d = 0.0;
    }
    const double G = integrand(L);
    tab.integrand[w] = G;
    const std::size_t off_z = L.pa.size(), off_m = off_z + L.pz.size(), off_mu = off_m + L.pm.size();
    auto gA = [&](int a) { return grad[a]; };
    auto gZ = [&](int z, int a) { return grad[off_z + L.zi(z, a)]; };
    auto gM = [&](int m, int z, int a) { return grad[off_m + L.mi(m, z, a)]; };
    auto gMu = [&](int a, int z, int m) { return grad[off_mu + L.mi(m, z, a)]; };
    double centre_a = 0.0;
    for (int a = 0; a < c.a; ++a) centre_a += L.PA(a) * gA(a);
    for (int a = 0; a < c.a; ++a) {
      const double pa = L.PA(a);
      double centre_z = 0.0;
      for (int z = 0; z < c.z; ++z) centre_z += L.PZ(z, a) * gZ(z, a);
      for (int z = 0; z < c.z; ++z) {
        const double pz = L.PZ(z, a);
        double centre_m = 0.0;
        for (int m = 0; m < c.m; ++m) centre_m += L.PM(m, z, a) * gM(m, z, a);
        for (int m = 0; m < c.m; ++m) {
          const double pm = L.PM(m, z, a);
          const bool fine = pa > 0.0 && pz > 0.0 && pm > 0.0 && pa >= tol && pz >= tol && pm >= tol;
          if (!fine) continue;
          const std::size_t i = c.cell(w, a, z, m);
          tab.weight[i] = gMu(a, z, m) / (pa * pz * pm);
          tab.rest[i] = G + (gA(a) - centre_a) + (gZ(z, a) - centre_z) / pa + (gM(m, z, a) - centre_m) / (pa * pz);
          tab.ok[i] = 1;
        }
      }
    }
  }
  return tab;
}

}  // namespace

EifTable chain_rule_table(const NuisanceSet& eta, TargetId t, const Weight& f) {
  require_valid(t);
  if (f.card() != eta.cards.a) throw ValidationError("weight levels do not match card_a");
  return chain_rule(eta, [&](const auto& L) { return detail::tau_integrand(L, t, f); });
}

EifTable chain_rule_ate_table(const NuisanceSet& eta, AteMean which) {
  if (eta.cards.a != 2) throw ValidationError("ATE decomposition needs binary A, got card_a = " + std::to_string(eta.cards.a));
  return chain_rule(eta, [&](const auto& L) { return detail::ate_integrand(L, which); });
}

double covariance_if(double a, const CovarianceComponents& c, double mu_a) {
  return (c.phi_a - c.tau_a) - mu_a * (c.phi_1 - c.tau_1) - c.tau_1 * (a - mu_a);
}

}  // namespace pathflux
