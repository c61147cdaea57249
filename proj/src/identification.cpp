#include "pathflux/identification.hpp"

#include <cmath>
#include <sstream>

#include "functional.hpp"
#include "pathflux/error.hpp"

namespace pathflux {

namespace detail {

LocalEta<Guarded> guarded_local_eta(const NuisanceSet& eta, int w) {
  const Cards& c = eta.cards;
  LocalEta<Guarded> L(c.a, c.z, c.m);
  for (int a = 0; a < c.a; ++a) {
    const std::size_t ia = c.aw(w, a);
    L.pa[a] = eta.p_a.is_defined(ia) ? Guarded(eta.p_a.values[ia]) : Guarded(0.0, encode_bad(Table::p_a, static_cast<std::size_t>(a)));
    for (int z = 0; z < c.z; ++z) {
      const std::size_t iz = c.zaw(w, a, z);
      L.pz[L.zi(z, a)] = eta.p_z.is_defined(iz) ? Guarded(eta.p_z.values[iz]) : Guarded(0.0, encode_bad(Table::p_z, L.zi(z, a)));
      for (int m = 0; m < c.m; ++m) {
        const std::size_t ic = c.cell(w, a, z, m);
        const std::size_t li = L.mi(m, z, a);
        L.pm[li] = eta.p_m.is_defined(ic) ? Guarded(eta.p_m.values[ic]) : Guarded(0.0, encode_bad(Table::p_m, li));
        L.mu[li] = eta.m_hat.is_defined(ic) ? Guarded(eta.m_hat.values[ic]) : Guarded(0.0, encode_bad(Table::mu, li));
      }
    }
  }
  return L;
}

std::string describe_bad(const Cards& c, int w, int bad) {
  const auto table = static_cast<Table>(bad / 1000000);
  const int i = bad % 1000000;
  switch (table) {
    case Table::p_a: return p_a_label(i, w);
    case Table::p_z: return p_z_label(i % c.z, i / c.z, w);
    case Table::p_m: {
      const int m = i % c.m, za = i / c.m;
      return p_m_label(m, za % c.z, za / c.z, w);
    }
    case Table::mu: {
      const int m = i % c.m, za = i / c.m;
      return m_hat_label(za / c.z, za % c.z, m, w);
    }
  }
  return "?";
}

}  // namespace detail

namespace {

using detail::Guarded;

double checked(const Guarded& g, const Cards& c, int w, const std::string& what) {
  if (g.bad >= 0)
    throw IdentificationError("overlap violation in " + what + ": needed cell " + detail::describe_bad(c, w, g.bad) +
                              " is undefined");
  return g.v;
}

void check_shapes(const NuisanceSet& eta, const WMarginal& wm) {
  validate(wm, eta.cards.w);
}

// Neumaier-compensated running sum.
struct Compensated {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace

void validate(const WMarginal& wm, int card_w) {
  if (static_cast<int>(wm.p.size()) != card_w)
    throw ValidationError("W marginal has " + std::to_string(wm.p.size()) + " levels, expected " + std::to_string(card_w));
  double s = 0.0;
  for (double p : wm.p) {
    if (!(p >= 0.0)) throw ValidationError("W marginal has a negative entry");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "W marginal sums to " << s;
    throw ValidationError(os.str());
  }
}

WMarginal w_marginal(const JointLaw& law) {
  WMarginal wm;
  wm.p.resize(law.cards.w);
  for (int w = 0; w < law.cards.w; ++w) wm.p[w] = law.p_w(w);
  return wm;
}

double identified_conditional_mean(const NuisanceSet& eta, TargetId t, int a, int w) {
  require_valid(t);
  const auto L = detail::guarded_local_eta(eta, w);
  return checked(detail::conditional_mean(L, t, a), eta.cards, w, t.name());
}

double identify_tau(const NuisanceSet& eta, const WMarginal& wm, TargetId t, const Weight& f) {
  require_valid(t);
  check_shapes(eta, wm);
  if (f.card() != eta.cards.a) throw ValidationError("weight levels do not match card_a");
  Compensated acc;
  for (int w = 0; w < eta.cards.w; ++w) {
    if (wm.p[w] == 0.0) continue;
    const auto L = detail::guarded_local_eta(eta, w);
    acc.add(wm.p[w] * checked(detail::tau_integrand(L, t, f), eta.cards, w, t.name()));
  }
  return acc.value();
}

double identify_conditional_mean(const NuisanceSet& eta, const WMarginal& wm, TargetId t, int a) {
  require_valid(t);
  check_shapes(eta, wm);
  Compensated num, den;
  for (int w = 0; w < eta.cards.w; ++w) {
    if (wm.p[w] == 0.0) continue;
    const auto L = detail::guarded_local_eta(eta, w);
    const Guarded weight = Guarded(wm.p[w]) * L.PA(a);
    const double pw = checked(weight, eta.cards, w, t.name());
    if (pw == 0.0) continue;
    den.add(pw);
    num.add(pw * checked(detail::conditional_mean(L, t, a), eta.cards, w, t.name()));
  }
  if (den.value() <= 0.0)
    throw IdentificationError("E[Y_" + t.name() + " | A=" + std::to_string(a) + "] undefined: P(A=" + std::to_string(a) + ") = 0");
  return num.value() / den.value();
}

double identify_total(const NuisanceSet& eta, const WMarginal& wm, const Weight& f) {
  return identify_tau(eta, wm, kS4, f);
}

double implied_p_m(const NuisanceSet& eta, int m, int a, int w) {
  double s = 0.0;
  for (int z = 0; z < eta.cards.z; ++z) s += eta.pm(m, z, a, w) * eta.pz(z, a, w);
  return s;
}

std::array<double, 8> identify_ate_means(const NuisanceSet& eta, const WMarginal& wm) {
  check_shapes(eta, wm);
  if (eta.cards.a != 2) throw ValidationError("ATE decomposition needs binary A, got card_a = " + std::to_string(eta.cards.a));
  std::array<Compensated, 8> acc;
  for (int w = 0; w < eta.cards.w; ++w) {
    if (wm.p[w] == 0.0) continue;
    const auto L = detail::guarded_local_eta(eta, w);
    for (std::size_t i = 0; i < 8; ++i) {
      const AteMean which = kAllAteMeans[i];
      acc[i].add(wm.p[w] * checked(detail::ate_integrand(L, which), eta.cards, w, std::string(ate_mean_name(which))));
    }
  }
  std::array<double, 8> out{};
  for (std::size_t i = 0; i < 8; ++i) out[i] = acc[i].value();
  return out;
}

AteComponents identify_ate_components(const NuisanceSet& eta, const WMarginal& wm) {
  return ate_components(identify_ate_means(eta, wm));
}

}  // namespace pathflux
