#include "rhomax/bounds.hpp"

#include <cmath>

#include "rhomax/errors.hpp"

namespace rhomax {

Prevalence::Prevalence(std::vector<double> q) : q_(std::move(q)) {
  if (q_.size() < 2) throw config_error("prevalence needs at least two classes");
  double sum = 0.0;
  for (double v : q_) {
    if (!std::isfinite(v) || v < 0.0)
      throw config_error("prevalence entries must be finite and >= 0");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw config_error("prevalence must sum to 1 (got " + std::to_string(sum) + ")");
}

Prevalence Prevalence::uniform(std::size_t c) {
  return Prevalence(std::vector<double>(c, 1.0 / static_cast<double>(c)));
}

Prevalence Prevalence::indicator(std::size_t c, std::size_t k) {
  std::vector<double> q(c, 0.0);
  q.at(k) = 1.0;
  return Prevalence(std::move(q));
}

double multinomial_term(const Prevalence& q, std::size_t s) {
  if (s == 0) throw config_error("sample size must be positive");
  double acc = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) acc += q[k] * (1.0 - q[k]);
  return acc / static_cast<double>(s);
}

double classification_error(const ConfusionMatrix& p, const Prevalence& q) {
  if (q.size() != p.size())
    throw config_error("prevalence length does not match the matrix");
  double acc = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k)
    acc += q[k] * (1.0 - p.entries(k, k));
  return acc;
}

double error_bound(const ConfusionMatrix& p) { return gershgorin(p).rho_max; }

BoundReport variance_bounds(const ConfusionMatrix& p, const Prevalence& q,
                            std::size_t s, bool assume_symmetric) {
  if (q.size() != p.size())
    throw config_error("prevalence length does not match the matrix");
  if (s == 0) throw config_error("sample size must be positive");

  BoundReport rep;
  rep.c = p.size();
  rep.s = s;
  const GershgorinReport g = gershgorin(p);
  rep.rho_max = g.rho_max;
  rep.error_bound = g.rho_max;
  if (!(g.rho_max < 0.5))
    throw property_violation(
        "variance bounds need rho_max < 1/2 (diagonal dominance)");

  const double c = static_cast<double>(rep.c);
  const double rho = g.rho_max;
  const double denom = static_cast<double>(s) * (1.0 - 2.0 * rho) * (1.0 - 2.0 * rho);
  rep.eps_rho = (2.0 * c * rho - c * c * rho * rho / (c - 1.0)) / denom;
  rep.eps_rho_tight = rep.eps_rho / c;
  rep.multinomial = multinomial_term(q, s);
  rep.eps_sigma = rep.eps_rho + rep.multinomial;
  rep.eps_sigma_tight = rep.eps_rho_tight + rep.multinomial;

  const double asym = (p.entries - p.entries.transpose()).cwiseAbs().maxCoeff();
  rep.tight_certified = assume_symmetric || asym <= 1e-12;
  return rep;
}

double weighted_variance_multiplier(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw config_error("weight matrix must be square");
  const double smax = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
  return smax * smax;
}

} // namespace rhomax
