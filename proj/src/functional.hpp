#pragma once

// Per-w integrands of the identification functionals, generic in the scalar type so the
// same code evaluates plain values, overlap-guarded values and forward-mode derivatives.

#include <cstddef>
#include <vector>

#include "pathflux/decomposition.hpp"
#include "pathflux/nuisance_set.hpp"
#include "pathflux/target.hpp"

namespace pathflux::detail {

// Value carrying the first undefined input it depends on. Multiplying by an exactly-zero
// defined value clears the mark: a zero weight makes the undefined factor irrelevant.
struct Guarded {
  double v = 0.0;
  int bad = -1;

  Guarded() = default;
  Guarded(double x) : v(x) {}  // NOLINT(google-explicit-constructor)
  Guarded(double x, int b) : v(x), bad(b) {}

  bool zero() const { return bad < 0 && v == 0.0; }
  friend Guarded operator+(Guarded x, Guarded y) { return {x.v + y.v, x.bad >= 0 ? x.bad : y.bad}; }
  friend Guarded operator*(Guarded x, Guarded y) {
    if (x.zero() || y.zero()) return {0.0, -1};
    return {x.v * y.v, x.bad >= 0 ? x.bad : y.bad};
  }
  Guarded& operator+=(Guarded y) { return *this = *this + y; }
};

struct Dual {
  double v = 0.0;
  double d = 0.0;

  Dual() = default;
  Dual(double x) : v(x) {}  // NOLINT(google-explicit-constructor)
  Dual(double x, double dx) : v(x), d(dx) {}

  friend Dual operator+(Dual x, Dual y) { return {x.v + y.v, x.d + y.d}; }
  friend Dual operator*(Dual x, Dual y) { return {x.v * y.v, x.v * y.d + x.d * y.v}; }
  Dual& operator+=(Dual y) { return *this = *this + y; }
};

enum class Table { p_a = 0, p_z = 1, p_m = 2, mu = 3 };

// eta restricted to one level of W. Indices: pa[a], pz[a*Z+z], pm/mu[(a*Z+z)*M+m].
template <class S>
struct LocalEta {
  int A = 0, Z = 0, M = 0;
  std::vector<S> pa, pz, pm, mu;

  LocalEta(int a, int z, int m)
      : A(a), Z(z), M(m), pa(a), pz(static_cast<std::size_t>(a) * z), pm(static_cast<std::size_t>(a) * z * m),
        mu(pm.size()) {}

  std::size_t zi(int z, int a) const { return static_cast<std::size_t>(a) * Z + z; }
  std::size_t mi(int m, int z, int a) const { return (static_cast<std::size_t>(a) * Z + z) * M + m; }

  const S& PA(int a) const { return pa[a]; }
  const S& PZ(int z, int a) const { return pz[zi(z, a)]; }
  const S& PM(int m, int z, int a) const { return pm[mi(m, z, a)]; }
  const S& MU(int a, int z, int m) const { return mu[mi(m, z, a)]; }

  std::size_t entries() const { return pa.size() + pz.size() + pm.size() + mu.size(); }
  S& entry(std::size_t i) {
    if (i < pa.size()) return pa[i];
    i -= pa.size();
    if (i < pz.size()) return pz[i];
    i -= pz.size();
    if (i < pm.size()) return pm[i];
    return mu[i - pm.size()];
  }
};

inline int encode_bad(Table t, std::size_t i) { return static_cast<int>(t) * 1000000 + static_cast<int>(i); }

// Plain copy of eta at level w.
template <class S>
LocalEta<S> local_eta(const NuisanceSet& eta, int w) {
  const Cards& c = eta.cards;
  LocalEta<S> L(c.a, c.z, c.m);
  for (int a = 0; a < c.a; ++a) {
    L.pa[a] = S(eta.pa(a, w));
    for (int z = 0; z < c.z; ++z) {
      L.pz[L.zi(z, a)] = S(eta.pz(z, a, w));
      for (int m = 0; m < c.m; ++m) {
        L.pm[L.mi(m, z, a)] = S(eta.pm(m, z, a, w));
        L.mu[L.mi(m, z, a)] = S(eta.mu(a, z, m, w));
      }
    }
  }
  return L;
}

LocalEta<Guarded> guarded_local_eta(const NuisanceSet& eta, int w);
std::string describe_bad(const Cards& c, int w, int bad);

template <class S>
S pma(const LocalEta<S>& L, int m, int a) {
  S s(0.0);
  for (int z = 0; z < L.Z; ++z) s += L.PM(m, z, a) * L.PZ(z, a);
  return s;
}

// E[Y_t | A = a, W = w].
template <class S>
S conditional_mean(const LocalEta<S>& L, TargetId t, int a) {
  S out(0.0);
  auto nu = [&](int z, int m) {
    S s(0.0);
    for (int b = 0; b < L.A; ++b) s += L.PA(b) * L.MU(b, z, m);
    return s;
  };
  if (t == kS0) {
    for (int z = 0; z < L.Z; ++z)
      for (int m = 0; m < L.M; ++m) out += L.PZ(z, a) * L.PM(m, z, a) * L.MU(a, z, m);
  } else if (t == kS1) {
    for (int z = 0; z < L.Z; ++z)
      for (int m = 0; m < L.M; ++m) out += L.PZ(z, a) * L.PM(m, z, a) * nu(z, m);
  } else if (t == kS1Emulated) {
    for (int m = 0; m < L.M; ++m) {
      const S q = pma(L, m, a);
      for (int z = 0; z < L.Z; ++z) out += L.PZ(z, a) * q * nu(z, m);
    }
  } else if (t == kS2Emulated || t == kS2Removed) {
    for (int m = 0; m < L.M; ++m) {
      S inner(0.0);
      for (int b = 0; b < L.A; ++b) {
        S s(0.0);
        for (int z = 0; z < L.Z; ++z) s += L.PZ(z, b) * L.MU(b, z, m);
        inner += L.PA(b) * s;
      }
      out += pma(L, m, a) * inner;
    }
  } else if (t == kS3Removed) {
    for (int b = 0; b < L.A; ++b) {
      S sb(0.0);
      for (int m = 0; m < L.M; ++m) {
        S inner(0.0);
        for (int z = 0; z < L.Z; ++z) inner += L.PZ(z, b) * L.MU(b, z, m);
        S mix(0.0);
        for (int zp = 0; zp < L.Z; ++zp) mix += L.PZ(zp, b) * L.PM(m, zp, a);
        sb += mix * inner;
      }
      out += L.PA(b) * sb;
    }
  } else if (t == kS3) {
    for (int b = 0; b < L.A; ++b) {
      S sb(0.0);
      for (int z = 0; z < L.Z; ++z)
        for (int m = 0; m < L.M; ++m) sb += L.PZ(z, b) * L.PM(m, z, a) * L.MU(b, z, m);
      out += L.PA(b) * sb;
    }
  } else {  // kS4
    for (int b = 0; b < L.A; ++b) {
      S sb(0.0);
      for (int z = 0; z < L.Z; ++z)
        for (int m = 0; m < L.M; ++m) sb += L.PZ(z, b) * L.PM(m, z, b) * L.MU(b, z, m);
      out += L.PA(b) * sb;
    }
  }
  return out;
}

// sum_a f(a) p_A(a | w) E[Y_t | a, w].
template <class S>
S tau_integrand(const LocalEta<S>& L, TargetId t, const Weight& f) {
  S out(0.0);
  for (int a = 0; a < L.A; ++a) {
    if (f(a) == 0.0) continue;
    out += S(f(a)) * L.PA(a) * conditional_mean(L, t, a);
  }
  return out;
}

// Integrand of the identified ATE-split means, with a' = 1 and a* = 0.
template <class S>
S ate_integrand(const LocalEta<S>& L, AteMean which) {
  S out(0.0);
  for (int z = 0; z < L.Z; ++z)
    for (int m = 0; m < L.M; ++m) {
      switch (which) {
        case AteMean::s0: out += L.PZ(z, 1) * L.PM(m, z, 1) * L.MU(1, z, m); break;
        case AteMean::s1: out += L.MU(0, z, m) * L.PZ(z, 1) * L.PM(m, z, 1); break;
        case AteMean::s1_prime: out += L.MU(0, z, m) * L.PZ(z, 1) * pma(L, m, 1); break;
        case AteMean::s2_prime:
        case AteMean::s2_double_prime: out += L.MU(0, z, m) * L.PZ(z, 0) * pma(L, m, 1); break;
        case AteMean::s3_double_prime: {
          S mix(0.0);
          for (int zp = 0; zp < L.Z; ++zp) mix += L.PM(m, zp, 1) * L.PZ(zp, 0);
          out += L.MU(0, z, m) * L.PZ(z, 0) * mix;
          break;
        }
        case AteMean::s3: out += L.MU(0, z, m) * L.PZ(z, 0) * L.PM(m, z, 1); break;
        case AteMean::s4: out += L.PZ(z, 0) * L.PM(m, z, 0) * L.MU(0, z, m); break;
      }
    }
  return out;
}

}  // namespace pathflux::detail
