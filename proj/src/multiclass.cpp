#include "rhomax/multiclass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "rhomax/rng.hpp"

namespace rhomax {

namespace {

double worst_column_radius(const Eigen::MatrixXd& p) {
  double rho = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j)
    rho = std::max(rho, p.col(j).sum() - p(j, j));
  return rho;
}

struct DiagEval {
  Eigen::VectorXd diag;
  double residual = 0.0;
  double rho = 0.0;
  ConfusionMatrix p;
};

DiagEval eval_balance(const ClassModel& model, const std::vector<double>& q,
                      const IntegrationSettings& settings) {
  const Partition part = bayes_partition(model, q);
  DiagEval ev{Eigen::VectorXd(), 0.0, 0.0,
              confusion_matrix(model, part, settings)};
  ev.diag = ev.p.entries.diagonal();
  const double dbar = ev.diag.mean();
  ev.residual = (ev.diag.array() - dbar).abs().maxCoeff();
  ev.rho = worst_column_radius(ev.p.entries);
  return ev;
}

std::vector<double> softmax(const std::vector<double>& z) {
  std::vector<double> q(z.size() + 1);
  double zmax = 0.0;  // the implicit last logit
  for (double v : z) zmax = std::max(zmax, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += q[i] = std::exp(z[i] - zmax);
  sum += q.back() = std::exp(-zmax);
  for (auto& v : q) v /= sum;
  return q;
}

// Deterministic Nelder-Mead minimization (no restarts, fixed coefficients).
template <class F>
std::pair<std::vector<double>, double> nelder_mead(F&& f, std::vector<double> z0,
                                                   double step, std::size_t max_evals,
                                                   double target,
                                                   std::size_t& evals) {
  const std::size_t n = z0.size();
  std::vector<std::vector<double>> xs(n + 1, z0);
  std::vector<double> fs(n + 1);
  for (std::size_t i = 1; i <= n; ++i) xs[i][i - 1] += step;
  for (std::size_t i = 0; i <= n; ++i) {
    fs[i] = f(xs[i]);
    ++evals;
  }

  while (evals < max_evals) {
    std::vector<std::size_t> ord(n + 1);
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(),
              [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    if (fs[ord[0]] <= target) break;

    const std::size_t worst = ord[n];
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= n; ++j)
        if (j != worst) centroid[i] += xs[j][i] / static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i)
        x[i] = centroid[i] + coef * (centroid[i] - xs[worst][i]);
      return x;
    };

    const auto refl = blend(1.0);
    const double f_refl = f(refl);
    ++evals;
    if (f_refl < fs[ord[0]]) {
      const auto exp_pt = blend(2.0);
      const double f_exp = f(exp_pt);
      ++evals;
      if (f_exp < f_refl) {
        xs[worst] = exp_pt;
        fs[worst] = f_exp;
      } else {
        xs[worst] = refl;
        fs[worst] = f_refl;
      }
      continue;
    }
    if (f_refl < fs[ord[n - 1]]) {
      xs[worst] = refl;
      fs[worst] = f_refl;
      continue;
    }
    const auto contr = blend(-0.5);
    const double f_contr = f(contr);
    ++evals;
    if (f_contr < fs[worst]) {
      xs[worst] = contr;
      fs[worst] = f_contr;
      continue;
    }
    for (std::size_t j = 0; j <= n; ++j) {  // shrink towards the best vertex
      if (j == ord[0]) continue;
      for (std::size_t i = 0; i < n; ++i)
        xs[j][i] = 0.5 * (xs[j][i] + xs[ord[0]][i]);
      fs[j] = f(xs[j]);
      ++evals;
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (fs[i] < fs[best]) best = i;
  return {xs[best], fs[best]};
}

} // namespace

BalanceResult balance_prevalence(const ClassModel& model, const Prevalence& q_init,
                                 const BalanceOptions& opts,
                                 const IntegrationSettings& settings) {
  const std::size_t c = model.size();
  if (q_init.size() != c)
    throw config_error("initial prevalence length does not match the model");
  for (std::size_t k = 0; k < c; ++k)
    if (q_init[k] <= 0.0)
      throw config_error("balancing needs a strictly positive initial prevalence");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0))
    throw config_error("damping must lie in (0, 1]");

  std::vector<double> q(q_init.values().begin(), q_init.values().end());
  DiagEval ev = eval_balance(model, q, settings);
  std::size_t iters = 0;
  bool converged = ev.residual <= opts.tol;

  while (!converged && iters < opts.max_iters) {
    const double dbar = ev.diag.mean();
    for (std::size_t k = 0; k < c; ++k) {
      const double dk = std::max(ev.diag(static_cast<Eigen::Index>(k)), 1e-12);
      if (dk <= 1e-9 && q[k] >= 0.98)
        throw property_violation("class '" + model.label(k) +
                                 "' never attains the argmax; its diagonal "
                                 "stays zero at prevalence " +
                                 std::to_string(q[k]));
      q[k] *= std::pow(dbar / dk, opts.damping);
    }
    const double sum = std::accumulate(q.begin(), q.end(), 0.0);
    for (auto& v : q) v = std::max(v / sum, 1e-12);

    ev = eval_balance(model, q, settings);
    ++iters;
    converged = ev.residual <= opts.tol;
  }

  bool used_fallback = false;
  if (!converged) {
    // Direct-search polish on softmax-parameterized prevalences.
    used_fallback = true;
    std::vector<double> z(c - 1);
    for (std::size_t i = 0; i + 1 < c; ++i) z[i] = std::log(q[i] / q.back());
    std::size_t evals = 0;
    auto objective = [&](const std::vector<double>& zz) {
      return eval_balance(model, softmax(zz), settings).residual;
    };
    const auto [z_best, f_best] =
        nelder_mead(objective, z, 0.25, 400, 0.5 * opts.tol, evals);
    (void)f_best;
    q = softmax(z_best);
    ev = eval_balance(model, q, settings);
    iters += evals;
    converged = ev.residual <= opts.tol;
  }

  BalanceResult res{Prevalence(q), std::move(ev.p), ev.rho,
                    ev.residual,   converged,       used_fallback,
                    iters};
  return res;
}

OptimalityCheck verify_balance_optimality(const ClassModel& model,
                                          double rho_star, std::size_t trials,
                                          std::uint64_t seed, double tol,
                                          const IntegrationSettings& settings) {
  OptimalityCheck out;
  out.trials = trials;
  out.worst_margin = std::numeric_limits<double>::infinity();
  if (trials == 0) {
    out.pass = true;
    out.worst_margin = 0.0;
    return out;
  }

  std::vector<double> margins(trials);
  std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic) if (settings.parallel)
  for (long long i = 0; i < static_cast<long long>(trials); ++i) {
    try {
      RandomStream rs = RandomStream::derive(seed, static_cast<std::uint64_t>(i));
      // Dirichlet(1, ..., 1): normalized standard exponentials.
      std::vector<double> q(model.size());
      double sum = 0.0;
      for (auto& v : q) sum += v = -std::log(rs.uniform_open());
      for (auto& v : q) v /= sum;
      const ConfusionMatrix p =
          confusion_matrix(model, bayes_partition(model, q), settings);
      margins[static_cast<std::size_t>(i)] =
          worst_column_radius(p.entries) - rho_star;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (double m : margins) {
    out.worst_margin = std::min(out.worst_margin, m);
    if (m < -tol) out.failures++;
  }
  out.pass = out.failures == 0;
  return out;
}

CutOptimResult optimize_cutpoints_1d(const ClassModel& model,
                                     const std::vector<double>& init_cuts,
                                     const CutOptimOptions& opts,
                                     const IntegrationSettings& settings) {
  const std::size_t c = model.size();
  if (model.dim() != 1)
    throw config_error("cut-point optimization requires one-dimensional data");
  if (init_cuts.size() != c - 1)
    throw config_error("need exactly c-1 initial cuts");
  if (!(opts.initial_step > 0.0) || opts.rounds == 0)
    throw config_error("cut optimization needs a positive step and >= 1 round");

  const Box window = model.support();
  std::size_t evals = 0;
  auto objective = [&](const std::vector<double>& cuts) {
    const ConfusionMatrix p =
        confusion_matrix(model, Partition(CutPoints1D{cuts, {}}), settings);
    ++evals;
    return std::pair<double, double>(worst_column_radius(p.entries),
                                     p.entries.trace());
  };
  // Lexicographic: smaller radius first, larger trace among radius ties.
  auto better = [](double rho_a, double tr_a, double rho_b, double tr_b) {
    if (rho_a < rho_b - 1e-12) return true;
    if (rho_a > rho_b + 1e-12) return false;
    return tr_a > tr_b + 1e-12;
  };

  std::vector<double> cuts = init_cuts;
  auto [rho, trace] = objective(cuts);

  bool last_round_clean = false;
  double step = opts.initial_step;
  for (std::size_t round = 0; round < opts.rounds; ++round) {
    bool any_move = true;
    std::size_t sweeps = 0;
    while (any_move && sweeps < opts.max_sweeps) {
      any_move = false;
      ++sweeps;
      for (std::size_t i = 0; i + 1 < c; ++i) {
        const double left = i == 0 ? window.lo[0] : cuts[i - 1];
        const double right = i + 2 == c ? window.hi[0] : cuts[i + 1];
        std::vector<double> candidates;
        if (round == 0) {
          for (double x = left + step; x < right - 0.5 * step; x += step)
            candidates.push_back(x);
        } else {
          for (int k = -15; k <= 15; ++k) {
            const double x = cuts[i] + static_cast<double>(k) * step;
            if (x > left + 0.5 * step && x < right - 0.5 * step)
              candidates.push_back(x);
          }
        }
        std::vector<double> trial = cuts;
        for (double x : candidates) {
          if (x == cuts[i]) continue;
          trial[i] = x;
          const auto [r, tr] = objective(trial);
          if (better(r, tr, rho, trace)) {
            cuts[i] = x;
            rho = r;
            trace = tr;
            any_move = true;
          }
          trial[i] = cuts[i];
        }
      }
    }
    last_round_clean = !any_move;
    step *= 0.1;
  }

  CutOptimResult res;
  res.cuts = cuts;
  res.p = confusion_matrix(model, Partition(CutPoints1D{cuts, {}}), settings);
  res.rho_max = rho;
  res.trace = trace;
  res.evaluations = evals;
  res.converged = last_round_clean;
  return res;
}

} // namespace rhomax
