#include "pathflux/joint_law.hpp"

#include <sstream>

#include "pathflux/error.hpp"

namespace pathflux {

double JointLaw::total_mass() const {
  double s = 0.0;
  for (double p : prob) s += p;
  return s;
}

double JointLaw::p_w(int w) const {
  double s = 0.0;
  for (int a = 0; a < cards.a; ++a)
    for (int z = 0; z < cards.z; ++z)
      for (int m = 0; m < cards.m; ++m) s += prob[cards.cell(w, a, z, m)];
  return s;
}

JointLaw enumerate_joint(const DiscreteScm& scm, std::uint64_t cell_budget) {
  validate(scm);
  const std::uint64_t grid = noise_grid_size(scm);
  if (grid > cell_budget) {
    std::ostringstream os;
    os << "noise grid has " << grid << " cells, budget is " << cell_budget;
    throw CapacityError(os.str());
  }
  const Cards& c = scm.cards;
  JointLaw law;
  law.cards = c;
  law.prob.assign(c.cells(), 0.0);
  law.y_mean.assign(c.cells(), 0.0);

  // U_Y only enters through f_Y, so its sum is folded into the cell mean.
  for (std::size_t uw = 0; uw < scm.support_w(); ++uw) {
    const int w = scm.eval_w(uw);
    const double pw = scm.noise_w[uw];
    for (std::size_t ua = 0; ua < scm.support_a(); ++ua) {
      const int a = scm.eval_a(w, ua);
      const double pwa = pw * scm.noise_a[ua];
      for (std::size_t uz = 0; uz < scm.support_z(); ++uz) {
        const int z = scm.eval_z(a, w, uz);
        const double pwaz = pwa * scm.noise_z[uz];
        for (std::size_t um = 0; um < scm.support_m(); ++um) {
          const int m = scm.eval_m(z, a, w, um);
          law.prob[c.cell(w, a, z, m)] += pwaz * scm.noise_m[um];
        }
      }
    }
  }
  for (int w = 0; w < c.w; ++w)
    for (int a = 0; a < c.a; ++a)
      for (int z = 0; z < c.z; ++z)
        for (int m = 0; m < c.m; ++m)
          if (law.prob[c.cell(w, a, z, m)] > 0.0) law.y_mean[c.cell(w, a, z, m)] = scm.structural_y_mean(m, z, a, w);
  return law;
}

NuisanceSet derived_conditionals(const JointLaw& law) {
  const Cards& c = law.cards;
  NuisanceSet eta = NuisanceSet::undefined(c);
  std::vector<double> pw(c.w, 0.0), paw(c.aw_cells(), 0.0), pzaw(c.zaw_cells(), 0.0);
  for (int w = 0; w < c.w; ++w)
    for (int a = 0; a < c.a; ++a)
      for (int z = 0; z < c.z; ++z)
        for (int m = 0; m < c.m; ++m) {
          const double p = law.prob[c.cell(w, a, z, m)];
          pw[w] += p;
          paw[c.aw(w, a)] += p;
          pzaw[c.zaw(w, a, z)] += p;
        }
  for (int w = 0; w < c.w; ++w) {
    if (pw[w] <= 0.0) continue;
    for (int a = 0; a < c.a; ++a) {
      eta.p_a.set(c.aw(w, a), paw[c.aw(w, a)] / pw[w]);
      if (paw[c.aw(w, a)] <= 0.0) continue;
      for (int z = 0; z < c.z; ++z) {
        eta.p_z.set(c.zaw(w, a, z), pzaw[c.zaw(w, a, z)] / paw[c.aw(w, a)]);
        if (pzaw[c.zaw(w, a, z)] <= 0.0) continue;
        for (int m = 0; m < c.m; ++m) {
          const std::size_t i = c.cell(w, a, z, m);
          eta.p_m.set(i, law.prob[i] / pzaw[c.zaw(w, a, z)]);
          if (law.prob[i] > 0.0) eta.m_hat.set(i, law.y_mean[i]);
        }
      }
    }
  }
  return eta;
}

}  // namespace pathflux
