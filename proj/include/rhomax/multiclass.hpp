#pragma once

#include <cstdint>
#include <vector>

#include "rhomax/bounds.hpp"
#include "rhomax/confusion.hpp"
#include "rhomax/density.hpp"
#include "rhomax/partition.hpp"

namespace rhomax {

// --- equal-diagonal balancing ------------------------------------------------

struct BalanceOptions {
  std::size_t max_iters = 200;
  double tol = 1e-6;       // max_k |P_kk - mean diagonal| at the solution
  double damping = 0.5;    // exponent of the multiplicative prevalence update
};

struct BalanceResult {
  Prevalence q_star;
  ConfusionMatrix p_star;
  double rho_star = 0.0;
  double residual = 0.0;
  bool converged = false;
  bool used_fallback = false;  // direct-search polish after the fixed point
  std::size_t iterations = 0;
};

// Find the prevalence q* whose Bayes partition has all diagonal entries of
// its confusion matrix equal.  Multiplicative damped fixed point; if it
// stalls, a deterministic Nelder-Mead pass on softmax-parameterized
// prevalences polishes the residual.  A class whose diagonal stays at zero
// even when its prevalence is pushed towards 1 can never attain the argmax
// and is reported by label in a property_violation.
BalanceResult balance_prevalence(const ClassModel& model, const Prevalence& q_init,
                                 const BalanceOptions& opts = {},
                                 const IntegrationSettings& settings = {});

// --- optimality certificate ----------------------------------------------------

struct OptimalityCheck {
  std::size_t trials = 0;
  std::size_t failures = 0;
  double worst_margin = 0.0;  // min over trials of rho(q') - rho_star
  bool pass = false;
};

// Sample `trials` prevalences uniformly from the simplex and verify no Bayes
// partition achieves a worst-column radius below rho_star - tol.
OptimalityCheck verify_balance_optimality(const ClassModel& model,
                                          double rho_star, std::size_t trials,
                                          std::uint64_t seed, double tol = 1e-4,
                                          const IntegrationSettings& settings = {});

// --- 1-d cut-point descent -----------------------------------------------------

struct CutOptimOptions {
  double initial_step = 0.01;
  std::size_t rounds = 3;      // each round shrinks the step tenfold
  std::size_t max_sweeps = 50; // coordinate sweeps per round
};

struct CutOptimResult {
  std::vector<double> cuts;
  ConfusionMatrix p;
  double rho_max = 0.0;
  double trace = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

// Coordinate descent on c-1 interval cut points minimizing the worst column
// radius; among radius ties (within 1e-12) the larger trace wins, which
// pins down the representative of flat optima.
CutOptimResult optimize_cutpoints_1d(const ClassModel& model,
                                     const std::vector<double>& init_cuts,
                                     const CutOptimOptions& opts = {},
                                     const IntegrationSettings& settings = {});

} // namespace rhomax
