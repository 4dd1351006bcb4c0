#pragma once

// Semi-analytic machinery for a pair of axis-aligned (diagonal-covariance)
// 2-d Gaussians split by a likelihood-ratio rule.  At fixed x the rule
// log p1 - log p2 > log t is a quadratic in y, so the y-mass of each region
// is a sum of normal cdf differences and only the x integral needs adaptive
// quadrature.

#include <cmath>
#include <utility>

#include "rhomax/density.hpp"
#include "rhomax/mathutil.hpp"

namespace rhomax::detail {

struct DiagGauss2 {
  double mx = 0, sx = 1, my = 0, sy = 1, log_norm = 0;
};

inline bool as_diag_gauss2(const Density& d, DiagGauss2& out) {
  const auto* g = d.get_if<GaussianNd>();
  if (!g || g->mean.size() != 2) return false;
  if (g->cov(0, 1) != 0.0 || g->cov(1, 0) != 0.0) return false;
  out = {g->mean(0), std::sqrt(g->cov(0, 0)), g->mean(1), std::sqrt(g->cov(1, 1)),
         g->log_norm};
  return true;
}

// Quadratic-in-y coefficients of log p1(x,y) - log p2(x,y) - log t.
struct RatioQuadratic {
  double A = 0, B = 0;
  const DiagGauss2& g1;
  const DiagGauss2& g2;
  double log_t;

  RatioQuadratic(const DiagGauss2& a, const DiagGauss2& b, double lt)
      : g1(a), g2(b), log_t(lt) {
    A = 0.5 * (1.0 / (g2.sy * g2.sy) - 1.0 / (g1.sy * g1.sy));
    B = g1.my / (g1.sy * g1.sy) - g2.my / (g2.sy * g2.sy);
  }

  double C(double x) const {
    const double d1 = (x - g1.mx) / g1.sx;
    const double d2 = (x - g2.mx) / g2.sx;
    return (g1.log_norm - g2.log_norm) - 0.5 * d1 * d1 + 0.5 * d2 * d2 -
           0.5 * g1.my * g1.my / (g1.sy * g1.sy) +
           0.5 * g2.my * g2.my / (g2.sy * g2.sy) - log_t;
  }
};

// Mass of {y : A y^2 + B y + C > 0} under N(m, s^2).  When the quadratic
// vanishes identically the tie set is the whole line; tie_full says whether
// it counts as part of the region.
inline double upper_set_mass(double A, double B, double C, double m, double s,
                             bool tie_full) {
  if (A == 0.0) {
    if (B == 0.0) return C > 0.0 ? 1.0 : (C < 0.0 ? 0.0 : (tie_full ? 1.0 : 0.0));
    const double z = (-C / B - m) / s;
    return B > 0.0 ? norm_sf(z) : norm_cdf(z);
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc <= 0.0) return A > 0.0 ? 1.0 : 0.0;
  const double sq = std::sqrt(disc);
  double r1 = (-B - sq) / (2.0 * A);
  double r2 = (-B + sq) / (2.0 * A);
  if (r1 > r2) std::swap(r1, r2);
  const double inside = norm_cdf((r2 - m) / s) - norm_cdf((r1 - m) / s);
  return A > 0.0 ? 1.0 - inside : inside;
}

inline double marginal_x(const DiagGauss2& g, double x) {
  return norm_pdf((x - g.mx) / g.sx) / g.sx;
}

} // namespace rhomax::detail
