// Small construction helpers shared by the test files.
#pragma once

#include <utility>

#include "rhomax/density.hpp"

namespace testutil {

// GaussianNd carries derived members (Cholesky factor, inverse, log norm)
// that Density fills in; build it by field to leave them default.
inline rhomax::Density gauss_nd(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  rhomax::GaussianNd g;
  g.mean = std::move(mean);
  g.cov = std::move(cov);
  return rhomax::Density(std::move(g));
}

// GridDensity likewise derives per-cell prefix sums during construction.
inline rhomax::Density grid_density(
    std::vector<std::vector<double>> axes, std::vector<double> values,
    rhomax::GridInterp interp = rhomax::GridInterp::Multilinear) {
  rhomax::GridDensity g;
  g.axes = std::move(axes);
  g.values = std::move(values);
  g.interp = interp;
  return rhomax::Density(std::move(g));
}

} // namespace testutil
