#pragma once

#include <vector>

#include "rhomax/confusion.hpp"
#include "rhomax/density.hpp"
#include "rhomax/partition.hpp"

namespace rhomax {

// Measures of the likelihood-ratio regions at level t for a two-class model:
// mu1 = p1-mass of the strict region {p1 > t p2}, mu2 = p2-mass of
// {p1 < t p2}, and the tie-set masses under both densities.
struct LevelCurvePoint {
  double t = 1.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double delta = 0.0;           // mu1 - mu2 (non-increasing in t)
  double boundary_mass1 = 0.0;  // p1({p1 == t p2})
  double boundary_mass2 = 0.0;  // p2({p1 == t p2})
  double rho_max = 0.0;         // worst column radius with ties sent to class 0
};

struct WaterLevelResult {
  double t_star = 1.0;
  double rho_star = 0.0;
  double mu1_star = 0.0;  // diagonal entries of the balanced matrix
  double mu2_star = 0.0;
  double boundary_mass1 = 0.0;  // tie mass granted to class 0 (under p1)
  double boundary_mass2 = 0.0;  // tie mass granted to class 1 (under p2)
  bool atom_case = false;       // tie set had positive mass; explicit split
  // RatioThreshold or BoundarySplitThreshold realizing the optimum.
  Partition partition{Partition::Variant{RatioThreshold{}}};
};

// Region measures at one level.  Deterministic-integration models only:
// one-dimensional evaluable densities, or a pair of axis-aligned Gaussians
// in two dimensions.
LevelCurvePoint level_measures(const ClassModel& model, double t,
                               const IntegrationSettings& settings = {});

// Find the level t* where the curve delta(t) = mu1 - mu2 crosses zero and
// build the minimax partition.  When delta jumps across zero (the tie set
// carries mass — "atom" case), the tie set is carved explicitly so both
// diagonal entries land on the common value; this needs piecewise-constant
// densities on the tie set.  Throws non_convergence when no crossing exists
// in t within [1e-12, 1e12].
WaterLevelResult solve_water_level(const ClassModel& model,
                                   double tol_delta = 1e-8,
                                   const IntegrationSettings& settings = {});

// Level curve over an explicit grid of thresholds; the parallel version
// distributes grid points over threads and returns bitwise-identical output
// to the serial reference.
std::vector<LevelCurvePoint> sweep_levels(const ClassModel& model,
                                          const std::vector<double>& levels,
                                          const IntegrationSettings& settings = {});
std::vector<LevelCurvePoint> sweep_levels_serial(
    const ClassModel& model, const std::vector<double>& levels,
    const IntegrationSettings& settings = {});

} // namespace rhomax
