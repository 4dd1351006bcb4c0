#pragma once

#include <optional>
#include <vector>

#include "rhomax/confusion.hpp"
#include "rhomax/density.hpp"
#include "rhomax/partition.hpp"

namespace rhomax {

struct NoiseSweepPoint {
  double varsigma2 = 0.0;
  double t_star = 1.0;
  double rho_star = 0.0;              // re-optimized after smoothing
  std::optional<double> rho_fixed;    // fixed partition, when one is given
};

struct NoiseSweepResult {
  std::vector<NoiseSweepPoint> points;
  // Whether rho_star is non-decreasing along the grid (allowing slack for
  // integration error).  The re-optimized radius can only degrade with more
  // measurement noise; a fixed partition's radius can move either way.
  bool rho_star_monotone = true;
  double monotone_slack = 1e-9;
};

// Smooth a two-class model with N(0, varsigma2 * shape) for every grid value
// (ascending), re-solve the water level, and optionally track a fixed
// partition alongside.  Grid points run in parallel; output does not depend
// on the thread count.
NoiseSweepResult rho_star_vs_noise(const ClassModel& model,
                                   const Eigen::MatrixXd& shape,
                                   const std::vector<double>& varsigma2_grid,
                                   const Partition* fixed = nullptr,
                                   const IntegrationSettings& settings = {},
                                   double tol_delta = 1e-8);

// Worst column radius of a fixed partition after smoothing the model.
double fixed_partition_rho(const ClassModel& model, const Partition& part,
                           const NoiseSpec& noise,
                           const IntegrationSettings& settings = {});

} // namespace rhomax
