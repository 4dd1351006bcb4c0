#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "rhomax/confusion.hpp"

namespace rhomax {

// A point on the probability simplex (validated: non-negative, sums to 1
// within 1e-12).
class Prevalence {
public:
  explicit Prevalence(std::vector<double> q);
  static Prevalence uniform(std::size_t c);
  static Prevalence indicator(std::size_t c, std::size_t k);

  std::size_t size() const { return q_.size(); }
  double operator[](std::size_t k) const { return q_[k]; }
  std::span<const double> values() const { return q_; }
  Eigen::Map<const Eigen::VectorXd> vec() const {
    return {q_.data(), static_cast<Eigen::Index>(q_.size())};
  }

private:
  std::vector<double> q_;
};

// sum_k q_k (1 - q_k) / s: the irreducible multinomial variance of the raw
// cell fractions at sample size s.
double multinomial_term(const Prevalence& q, std::size_t s);

// Expected misclassification rate sum_k q_k (1 - P_kk).
double classification_error(const ConfusionMatrix& p, const Prevalence& q);

// Uniform (prevalence-free) bound on the misclassification rate: rho_max.
// It is attained at the prevalence concentrated on the worst column.
double error_bound(const ConfusionMatrix& p);

// Uniform bounds on the variance of the corrected prevalence estimator
// q_hat = P^{-1} f at sample size s.  Two tiers: the `loose` pair holds for
// every diagonally dominant P; the `tight` pair (a factor c smaller) is
// certified only when P is symmetric.
struct BoundReport {
  std::size_t c = 0;
  std::size_t s = 0;
  double rho_max = 0.0;
  double error_bound = 0.0;       // = rho_max
  double eps_rho = 0.0;           // excess-variance bound, loose
  double eps_rho_tight = 0.0;     // excess-variance bound, symmetric tier
  double multinomial = 0.0;       // sum q(1-q)/s
  double eps_sigma = 0.0;         // total variance bound, loose
  double eps_sigma_tight = 0.0;   // total variance bound, symmetric tier
  bool tight_certified = false;   // symmetric (or asserted so by the caller)
};

BoundReport variance_bounds(const ConfusionMatrix& p, const Prevalence& q,
                            std::size_t s, bool assume_symmetric = false);

// Bound multiplier for the A-weighted error ||A (q_hat - q)||^2:
// sigma^2(A) <= ||A||_2^2 * sigma^2(I).
double weighted_variance_multiplier(const Eigen::MatrixXd& a);

} // namespace rhomax
