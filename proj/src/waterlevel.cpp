#include "rhomax/waterlevel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rhomax/integrate.hpp"
#include "rhomax/mathutil.hpp"
#include "gauss2d.hpp"

namespace rhomax {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double t_min = 1e-12, t_max = 1e12;

double mass_on(const Density& d, double a, double b, const Box& window,
               double tol) {
  if (d.has_cdf()) {
    const double fb = b == inf ? 1.0 : d.cdf(b);
    const double fa = a == -inf ? 0.0 : d.cdf(a);
    return std::max(0.0, fb - fa);
  }
  const double lo = std::max(a, window.lo[0]);
  const double hi = std::min(b, window.hi[0]);
  if (!(lo < hi)) return 0.0;
  std::vector<double> breaks{lo};
  for (double k : density_breakpoints(d))
    if (k > lo && k < hi) breaks.push_back(k);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  return integrate_pieces([&](double x) { return d(x); }, breaks, tol).value;
}

struct TieSegments {
  std::vector<Interval> segments;  // tie set, left to right
};

LevelCurvePoint measures_1d(const ClassModel& model, double t,
                            const IntegrationSettings& s,
                            TieSegments* ties) {
  const Density& p1 = model.density(0);
  const Density& p2 = model.density(1);
  const Box window = model.support();
  std::vector<double> forced = density_breakpoints(p1);
  {
    const auto b2 = density_breakpoints(p2);
    forced.insert(forced.end(), b2.begin(), b2.end());
  }
  const auto segments = segment_by_label(
      [&](double x) { return ratio_compare(p1, p2, t, x); }, window.lo[0],
      window.hi[0], std::move(forced), s.scan_grid);

  LevelCurvePoint out;
  out.t = t;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const double a = i == 0 ? -inf : segments[i].lo;
    const double b = i + 1 == segments.size() ? inf : segments[i].hi;
    switch (segments[i].label) {
      case 1:
        out.mu1 += mass_on(p1, a, b, window, s.quad_tol);
        break;
      case -1:
        out.mu2 += mass_on(p2, a, b, window, s.quad_tol);
        break;
      default:
        out.boundary_mass1 += mass_on(p1, a, b, window, s.quad_tol);
        out.boundary_mass2 += mass_on(p2, a, b, window, s.quad_tol);
        if (ties) ties->segments.push_back({segments[i].lo, segments[i].hi});
        break;
    }
  }
  out.delta = out.mu1 - out.mu2;
  out.rho_max = 1.0 - std::min(out.mu1 + out.boundary_mass1, out.mu2);
  return out;
}

LevelCurvePoint measures_gauss2d(const detail::DiagGauss2& g1,
                                 const detail::DiagGauss2& g2, double t,
                                 const IntegrationSettings& s) {
  LevelCurvePoint out;
  out.t = t;
  if (t == 0.0) {
    out.mu1 = 1.0;  // {p1 > 0} is everything for a Gaussian
    out.mu2 = 0.0;
  } else {
    const detail::RatioQuadratic quad(g1, g2, std::log(t));
    const bool same_marginal = g1.mx == g2.mx && g1.sx == g2.sx;
    if (quad.A == 0.0 && quad.B == 0.0 && same_marginal && quad.C(g1.mx) == 0.0) {
      // Identical densities: the tie set is the whole plane.
      out.boundary_mass1 = out.boundary_mass2 = 1.0;
      out.delta = 0.0;
      out.rho_max = 0.0;
      return out;
    }
    auto strip = [&](const detail::DiagGauss2& g, bool region0) {
      auto f = [&](double x) {
        const double m0 = detail::upper_set_mass(quad.A, quad.B, quad.C(x),
                                                 g.my, g.sy, false);
        return detail::marginal_x(g, x) * (region0 ? m0 : 1.0 - m0);
      };
      return integrate(f, g.mx - 8.5 * g.sx, g.mx + 8.5 * g.sx, s.quad_tol).value;
    };
    out.mu1 = strip(g1, true);
    out.mu2 = strip(g2, false);
  }
  out.delta = out.mu1 - out.mu2;
  out.rho_max = 1.0 - std::min(out.mu1, out.mu2);
  return out;
}

LevelCurvePoint measures(const ClassModel& model, double t,
                         const IntegrationSettings& s, TieSegments* ties) {
  if (model.size() != 2)
    throw config_error("level measures are defined for two-class models");
  if (!(t >= 0.0) || !std::isfinite(t))
    throw config_error("threshold level must be finite and >= 0");
  if (model.dim() == 1) {
    for (std::size_t k = 0; k < 2; ++k)
      if (!model.density(k).evaluable())
        throw unsupported_operation(
            "level measures need evaluable class densities");
    return measures_1d(model, t, s, ties);
  }
  detail::DiagGauss2 g1, g2;
  if (model.dim() == 2 && as_diag_gauss2(model.density(0), g1) &&
      as_diag_gauss2(model.density(1), g2))
    return measures_gauss2d(g1, g2, t, s);
  throw unsupported_operation(
      "water levelling needs deterministic integration: one-dimensional "
      "models or axis-aligned Gaussian pairs in two dimensions");
}

// Is d constant on [lo, hi]?  (Needed to carve the tie set exactly.)
bool locally_constant(const Density& d, double lo, double hi) {
  const double v0 = d(lo + 1e-12 * (hi - lo) + 1e-300);
  for (double f : {0.25, 0.5, 0.75, 1.0 - 1e-12}) {
    if (std::fabs(d(lo + f * (hi - lo)) - v0) > 1e-12 * (1.0 + v0)) return false;
  }
  return true;
}

// When delta(t) jumps across zero without ever vanishing, the jump sits on a
// plateau of the likelihood ratio p1/p2 that the probe lattice missed.
// Recover the plateau value: locate a segment whose label flips across the
// collapsed bracket [tl, th] and return a level at which ratio_compare
// labels that segment an exact tie (0.0 when no such level is found).
double snap_to_plateau(const ClassModel& model, double tl, double th,
                       const IntegrationSettings& s) {
  const Density& p1 = model.density(0);
  const Density& p2 = model.density(1);
  const Box window = model.support();
  std::vector<double> forced = density_breakpoints(p1);
  {
    const auto b2 = density_breakpoints(p2);
    forced.insert(forced.end(), b2.begin(), b2.end());
  }
  const auto segments = segment_by_label(
      [&](double x) { return ratio_compare(p1, p2, th, x); }, window.lo[0],
      window.hi[0], std::move(forced), s.scan_grid);
  for (const auto& seg : segments) {
    const double x = 0.5 * (seg.lo + seg.hi);
    if (ratio_compare(p1, p2, tl, x) == ratio_compare(p1, p2, th, x)) continue;
    const double v1 = p1(x), v2 = p2(x);
    if (!(v1 > 0.0) || !(v2 > 0.0)) continue;
    // The exact-tie level must satisfy log v1 == log v2 + log t in floating
    // point; scan the neighbourhood of the linear-space quotient for it.
    double cand = v1 / v2;
    for (int k = 0; k < 5 && cand > 0.0; ++k, cand = std::nextafter(cand, 0.0))
      if (ratio_compare(p1, p2, cand, x) == 0) return cand;
    cand = std::nextafter(v1 / v2, inf);
    for (int k = 0; k < 4; ++k, cand = std::nextafter(cand, inf))
      if (ratio_compare(p1, p2, cand, x) == 0) return cand;
  }
  return 0.0;
}

} // namespace

LevelCurvePoint level_measures(const ClassModel& model, double t,
                               const IntegrationSettings& settings) {
  return measures(model, t, settings, nullptr);
}

WaterLevelResult solve_water_level(const ClassModel& model, double tol_delta,
                                   const IntegrationSettings& settings) {
  if (!(tol_delta > 0.0)) throw config_error("tol_delta must be positive");
  auto at = [&](double t) { return measures(model, t, settings, nullptr); };

  // A probe is the water level if delta vanishes there, or if its tie set
  // carries enough mass that splitting it can bring delta to zero.
  auto is_level = [&](const LevelCurvePoint& p) {
    if (std::fabs(p.delta) <= tol_delta) return true;
    return p.boundary_mass1 + p.boundary_mass2 > 1e-9 &&
           p.delta - p.boundary_mass2 <= tol_delta &&
           p.delta + p.boundary_mass1 >= -tol_delta;
  };

  // Bracket the zero crossing of delta(t), expanding geometrically from 1.
  double tl = 1.0, th = 1.0;
  LevelCurvePoint probe = at(1.0);
  bool root_found = is_level(probe);
  if (!root_found) {
    if (probe.delta > 0.0) {
      while (true) {
        if (th >= t_max)
          throw non_convergence("no water level: delta(t) stays positive up to t = 1e12");
        tl = th;
        th = std::min(th * 2.0, t_max);
        probe = at(th);
        if (is_level(probe)) {
          root_found = true;
          break;
        }
        if (probe.delta < 0.0) break;
      }
    } else {
      while (true) {
        if (tl <= t_min)
          throw non_convergence("no water level: delta(t) stays negative down to t = 1e-12");
        th = tl;
        tl = std::max(tl * 0.5, t_min);
        probe = at(tl);
        if (is_level(probe)) {
          root_found = true;
          break;
        }
        if (probe.delta > 0.0) break;
      }
    }
  }

  double t_star = probe.t;
  if (!root_found) {
    // Bisect in log t until the root is hit or the bracket collapses onto a
    // jump of the (monotone) level curve.
    while (th > tl * (1.0 + 1e-12)) {
      const double tm = std::sqrt(tl * th);
      const LevelCurvePoint m = at(tm);
      if (is_level(m)) {
        root_found = true;
        t_star = tm;
        break;
      }
      (m.delta > 0.0 ? tl : th) = tm;
    }
    if (!root_found && model.dim() == 1) {
      // Collapsed onto a jump: the level is a ratio plateau the probe
      // lattice never hit exactly.  Recover it and probe once more.
      const double t_snap = snap_to_plateau(model, tl, th, settings);
      if (t_snap > 0.0 && is_level(at(t_snap))) {
        root_found = true;
        t_star = t_snap;
      }
    }
    if (!root_found) t_star = std::sqrt(tl * th);
  }

  TieSegments ties;
  const LevelCurvePoint L =
      model.dim() == 1 ? measures_1d(model, t_star, settings, &ties)
                       : at(t_star);
  const double w = L.boundary_mass1 + L.boundary_mass2;

  WaterLevelResult res;
  res.t_star = t_star;

  if (w <= 1e-9) {
    if (!root_found)
      throw non_convergence(
          "level curve jumps across zero without measurable tie mass; "
          "integration is inconsistent");
    res.mu1_star = L.mu1;
    res.mu2_star = L.mu2;
    res.rho_star = 1.0 - std::min(L.mu1, L.mu2);
    res.atom_case = false;
    res.partition = Partition(RatioThreshold{t_star, 0});
    return res;
  }

  // Tie set with positive mass: carve it so both diagonals are equal.  The
  // share beta of the tie mass (under either density: on the tie set
  // p1 = t p2, so shares coincide) goes to class 0.
  double beta = (L.mu2 - L.mu1 + L.boundary_mass2) / w;
  if (beta < -1e-6 || beta > 1.0 + 1e-6)
    throw non_convergence("tie split does not balance the level curve");
  beta = std::clamp(beta, 0.0, 1.0);

  if (model.dim() != 1)
    throw unsupported_operation(
        "tie set has positive mass in two dimensions; no explicit split");

  const Density& p2 = model.density(1);
  const Density& p1 = model.density(0);
  double target = beta * L.boundary_mass2;  // p2-mass wanted in class 0
  std::vector<Interval> to_first;
  const Box window = model.support();
  for (const auto& seg : ties.segments) {
    if (target <= 1e-15) break;
    const double m2 = mass_on(p2, seg.lo, seg.hi, window, settings.quad_tol);
    const double m1 = mass_on(p1, seg.lo, seg.hi, window, settings.quad_tol);
    if (m2 <= 0.0 && m1 <= 0.0) continue;
    if (m2 <= 0.0) {
      // Tie against a vanishing p2 (t = 0 style): all of it helps class 0.
      to_first.push_back({seg.lo, seg.hi});
      continue;
    }
    if (m2 <= target + 1e-15) {
      to_first.push_back({seg.lo, seg.hi});
      target -= m2;
      continue;
    }
    if (!locally_constant(p2, seg.lo, seg.hi))
      throw unsupported_operation(
          "tie split needs piecewise-constant densities on the tie set");
    const double height = m2 / (seg.hi - seg.lo);
    to_first.push_back({seg.lo, seg.lo + target / height});
    target = 0.0;
    break;
  }

  res.atom_case = true;
  res.partition = Partition(BoundarySplitThreshold{t_star, to_first});
  res.boundary_mass1 = beta * L.boundary_mass1;
  res.boundary_mass2 = (1.0 - beta) * L.boundary_mass2;
  res.mu1_star = L.mu1 + beta * L.boundary_mass1;
  res.mu2_star = L.mu2 + (1.0 - beta) * L.boundary_mass2;
  if (std::fabs(res.mu1_star - res.mu2_star) > 1e-6)
    throw non_convergence("tie split failed to equalize the diagonals");
  res.rho_star = 1.0 - res.mu1_star;
  return res;
}

std::vector<LevelCurvePoint> sweep_levels_serial(
    const ClassModel& model, const std::vector<double>& levels,
    const IntegrationSettings& settings) {
  std::vector<LevelCurvePoint> out(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i)
    out[i] = level_measures(model, levels[i], settings);
  return out;
}

std::vector<LevelCurvePoint> sweep_levels(const ClassModel& model,
                                          const std::vector<double>& levels,
                                          const IntegrationSettings& settings) {
  std::vector<LevelCurvePoint> out(levels.size());
#pragma omp parallel for schedule(dynamic) if (settings.parallel)
  for (long long i = 0; i < static_cast<long long>(levels.size()); ++i)
    out[static_cast<std::size_t>(i)] =
        level_measures(model, levels[static_cast<std::size_t>(i)], settings);
  return out;
}

} // namespace rhomax
