#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

#include "rhomax/bounds.hpp"
#include "rhomax/confusion.hpp"
#include "rhomax/density.hpp"
#include "rhomax/partition.hpp"

namespace rhomax {

// Corrected prevalence estimate q_hat = P^{-1} f from observed cell
// fractions f.  Unbiased, but not constrained to the simplex.
Eigen::VectorXd estimate_prevalence(const Eigen::MatrixXd& p_inv,
                                    const Eigen::VectorXd& fractions);

struct SimulationOptions {
  std::size_t s = 100;          // classifications per replicate
  std::size_t replicates = 10'000;
  std::uint64_t seed = 0;
  bool parallel = true;
  bool store_replicates = false;
  std::optional<Eigen::MatrixXd> weight;  // A in ||A (q_hat - q)||^2
};

struct SimulationResult {
  std::size_t c = 0, s = 0, replicates = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd q_true;
  Eigen::VectorXd mean_q_hat;
  Eigen::VectorXd bias;     // mean_q_hat - q_true
  Eigen::VectorXd bias_se;  // per-component standard error of mean_q_hat
  double sigma2 = 0.0;      // mean ||q_hat - q||^2
  double sigma2_se = 0.0;   // Monte Carlo standard error of sigma2
  std::optional<double> sigma2_weighted;
  std::optional<double> sigma2_weighted_se;
  Eigen::MatrixXd replicate_q_hats;  // c x replicates when requested
};

// Draw `replicates` independent surveys of size s from the model under
// prevalence q, classify with the partition, correct with P^{-1}, and
// aggregate the estimator's error.  Each replicate derives its own random
// stream from (seed, replicate index), and aggregation runs in a fixed
// serial order, so output is bitwise identical for every thread count; the
// serial variant is the reference implementation of the same kernel.
SimulationResult simulate(const ClassModel& model, const Partition& part,
                          const ConfusionMatrix& p, const Prevalence& q,
                          const SimulationOptions& opts);
SimulationResult simulate_serial(const ClassModel& model, const Partition& part,
                                 const ConfusionMatrix& p, const Prevalence& q,
                                 const SimulationOptions& opts);

// Compare a simulated variance against its uniform bounds.  The empirical
// sigma2 is itself a Monte Carlo estimate, so the comparison allows a
// 3-standard-error slack; low_power flags replicate counts too small for
// the slack to mean anything.
struct BoundCheckResult {
  double sigma2 = 0.0, sigma2_se = 0.0;
  double eps_sigma = 0.0, eps_sigma_tight = 0.0;
  double margin = 0.0, margin_tight = 0.0;  // bound + 3 se - sigma2
  bool pass = false, pass_tight = false;
  bool low_power = false;
};

BoundCheckResult bound_check(const SimulationResult& sim, const BoundReport& bounds);

} // namespace rhomax
