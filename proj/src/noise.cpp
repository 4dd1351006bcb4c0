#include "rhomax/noise.hpp"

#include <cmath>

#include "rhomax/waterlevel.hpp"

namespace rhomax {

NoiseSweepResult rho_star_vs_noise(const ClassModel& model,
                                   const Eigen::MatrixXd& shape,
                                   const std::vector<double>& varsigma2_grid,
                                   const Partition* fixed,
                                   const IntegrationSettings& settings,
                                   double tol_delta) {
  if (model.size() != 2)
    throw config_error("noise sweeps are defined for two-class models");
  if (varsigma2_grid.empty()) throw config_error("noise grid is empty");
  for (std::size_t i = 0; i < varsigma2_grid.size(); ++i) {
    if (!(varsigma2_grid[i] >= 0.0))
      throw config_error("noise magnitudes must be >= 0");
    if (i > 0 && !(varsigma2_grid[i] > varsigma2_grid[i - 1]))
      throw config_error("noise grid must be strictly increasing");
  }

  NoiseSweepResult out;
  out.points.resize(varsigma2_grid.size());

  // Exceptions must not escape an OpenMP region; carry one out manually.
  std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic) if (settings.parallel)
  for (long long i = 0; i < static_cast<long long>(varsigma2_grid.size()); ++i) {
    try {
      const double v2 = varsigma2_grid[static_cast<std::size_t>(i)];
      const NoiseSpec noise(v2, shape);
      const ClassModel smoothed = model.convolved(noise);
      const WaterLevelResult wl =
          solve_water_level(smoothed, tol_delta, settings);
      NoiseSweepPoint pt;
      pt.varsigma2 = v2;
      pt.t_star = wl.t_star;
      pt.rho_star = wl.rho_star;
      if (fixed) {
        const ConfusionMatrix p = confusion_matrix(smoothed, *fixed, settings);
        pt.rho_fixed = gershgorin(p).rho_max;
      }
      out.points[static_cast<std::size_t>(i)] = pt;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 1; i < out.points.size(); ++i)
    if (out.points[i].rho_star <
        out.points[i - 1].rho_star - out.monotone_slack) {
      out.rho_star_monotone = false;
      break;
    }
  return out;
}

double fixed_partition_rho(const ClassModel& model, const Partition& part,
                           const NoiseSpec& noise,
                           const IntegrationSettings& settings) {
  const ClassModel smoothed = model.convolved(noise);
  return gershgorin(confusion_matrix(smoothed, part, settings)).rho_max;
}

} // namespace rhomax
