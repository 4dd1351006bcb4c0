#include "rhomax/prevalence.hpp"

#include <cmath>
#include <vector>

#include "rhomax/errors.hpp"

namespace rhomax {

Eigen::VectorXd estimate_prevalence(const Eigen::MatrixXd& p_inv,
                                    const Eigen::VectorXd& fractions) {
  if (p_inv.cols() != fractions.size())
    throw config_error("fraction vector length does not match the matrix");
  return p_inv * fractions;
}

namespace {

struct ReplicateOut {
  double norm2 = 0.0;
  double wnorm2 = 0.0;
};

// One survey: draw class counts ~ multinomial(s, q), classify every draw,
// correct the cell fractions.  Everything is derived from the replicate's
// own stream.
void run_replicate(const ClassModel& model, const Partition& part,
                   const Eigen::MatrixXd& p_inv, const Prevalence& q,
                   const SimulationOptions& opts, std::uint64_t rep,
                   Eigen::VectorXd& q_hat, ReplicateOut& out) {
  const std::size_t c = q.size();
  const std::size_t n = model.dim();
  RandomStream rs = RandomStream::derive(opts.seed, rep);

  std::vector<std::size_t> counts(c, 0);
  for (std::size_t i = 0; i < opts.s; ++i) {
    double u = rs.uniform();
    std::size_t k = c - 1;
    for (std::size_t j = 0; j < c; ++j) {
      if (u < q[j]) {
        k = j;
        break;
      }
      u -= q[j];
    }
    counts[k]++;
  }

  Eigen::VectorXd cells = Eigen::VectorXd::Zero(c);
  std::vector<double> buf(n);
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t i = 0; i < counts[k]; ++i) {
      model.density(k).sample_into(rs, std::span<double>(buf.data(), n));
      cells(static_cast<Eigen::Index>(
          part.assign(model, std::span<const double>(buf.data(), n))))++;
    }
  cells /= static_cast<double>(opts.s);

  q_hat = p_inv * cells;
  const Eigen::VectorXd dev = q_hat - q.vec();
  out.norm2 = dev.squaredNorm();
  if (opts.weight) out.wnorm2 = (*opts.weight * dev).squaredNorm();
}

SimulationResult aggregate(const ClassModel& model, const Partition& part,
                           const ConfusionMatrix& p, const Prevalence& q,
                           const SimulationOptions& opts, bool parallel) {
  part.validate_for(model);
  if (q.size() != model.size())
    throw config_error("prevalence length does not match the class count");
  if (opts.s == 0 || opts.replicates == 0)
    throw config_error("sample size and replicate count must be positive");
  if (opts.weight && (opts.weight->rows() != static_cast<Eigen::Index>(q.size()) ||
                      opts.weight->cols() != static_cast<Eigen::Index>(q.size())))
    throw config_error("weight matrix shape does not match the class count");

  const Eigen::MatrixXd p_inv = invert(p);
  const std::size_t c = q.size();
  const std::size_t reps = opts.replicates;

  Eigen::MatrixXd hats(c, reps);
  std::vector<ReplicateOut> outs(reps);

#pragma omp parallel for schedule(static) if (parallel)
  for (long long i = 0; i < static_cast<long long>(reps); ++i) {
    Eigen::VectorXd q_hat(c);
    run_replicate(model, part, p_inv, q, opts, static_cast<std::uint64_t>(i),
                  q_hat, outs[static_cast<std::size_t>(i)]);
    hats.col(i) = q_hat;
  }

  SimulationResult res;
  res.c = c;
  res.s = opts.s;
  res.replicates = reps;
  res.seed = opts.seed;
  res.q_true = q.vec();

  // Fixed-order reductions (replicate index order) keep results identical
  // across thread counts.
  res.mean_q_hat = Eigen::VectorXd::Zero(c);
  for (std::size_t i = 0; i < reps; ++i) res.mean_q_hat += hats.col(i);
  res.mean_q_hat /= static_cast<double>(reps);
  res.bias = res.mean_q_hat - res.q_true;

  res.bias_se = Eigen::VectorXd::Zero(c);
  double m1 = 0.0;
  for (std::size_t i = 0; i < reps; ++i) m1 += outs[i].norm2;
  m1 /= static_cast<double>(reps);
  double v = 0.0;
  for (std::size_t i = 0; i < reps; ++i) {
    const Eigen::VectorXd d = hats.col(i) - res.mean_q_hat;
    res.bias_se += d.cwiseProduct(d);
    const double e = outs[i].norm2 - m1;
    v += e * e;
  }
  const double nm1 = reps > 1 ? static_cast<double>(reps - 1) : 1.0;
  res.bias_se = (res.bias_se / nm1 / static_cast<double>(reps)).cwiseSqrt();
  res.sigma2 = m1;
  res.sigma2_se = std::sqrt(v / nm1 / static_cast<double>(reps));

  if (opts.weight) {
    double wm = 0.0;
    for (std::size_t i = 0; i < reps; ++i) wm += outs[i].wnorm2;
    wm /= static_cast<double>(reps);
    double wv = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
      const double e = outs[i].wnorm2 - wm;
      wv += e * e;
    }
    res.sigma2_weighted = wm;
    res.sigma2_weighted_se = std::sqrt(wv / nm1 / static_cast<double>(reps));
  }

  if (opts.store_replicates) res.replicate_q_hats = std::move(hats);
  return res;
}

} // namespace

SimulationResult simulate(const ClassModel& model, const Partition& part,
                          const ConfusionMatrix& p, const Prevalence& q,
                          const SimulationOptions& opts) {
  return aggregate(model, part, p, q, opts, opts.parallel);
}

SimulationResult simulate_serial(const ClassModel& model, const Partition& part,
                                 const ConfusionMatrix& p, const Prevalence& q,
                                 const SimulationOptions& opts) {
  return aggregate(model, part, p, q, opts, false);
}

BoundCheckResult bound_check(const SimulationResult& sim, const BoundReport& bounds) {
  if (sim.c != bounds.c || sim.s != bounds.s)
    throw config_error("simulation and bound report disagree on c or s");
  BoundCheckResult r;
  r.sigma2 = sim.sigma2;
  r.sigma2_se = sim.sigma2_se;
  r.eps_sigma = bounds.eps_sigma;
  r.eps_sigma_tight = bounds.eps_sigma_tight;
  r.margin = bounds.eps_sigma + 3.0 * sim.sigma2_se - sim.sigma2;
  r.margin_tight = bounds.eps_sigma_tight + 3.0 * sim.sigma2_se - sim.sigma2;
  r.pass = r.margin >= 0.0;
  r.pass_tight = r.margin_tight >= 0.0;
  r.low_power = sim.replicates < 30;
  return r;
}

} // namespace rhomax
