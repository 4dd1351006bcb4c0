#include "rhomax/confusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rhomax/integrate.hpp"
#include "rhomax/mathutil.hpp"
#include "gauss2d.hpp"

namespace rhomax {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Probability mass of a density on [a, b] (possibly infinite ends) through
// its cdf.
double cdf_mass(const Density& d, double a, double b) {
  const double fb = b == inf ? 1.0 : d.cdf(b);
  const double fa = a == -inf ? 0.0 : d.cdf(a);
  return std::max(0.0, fb - fa);
}

struct ColumnAccum {
  Eigen::MatrixXd entries;
  std::vector<double> err;  // per-column integration error estimate
  bool used_quadrature = false;
};

// Mass of class density k on [a, b]; closed cdf if available (and not
// disabled), adaptive quadrature otherwise.
void add_interval_mass(ColumnAccum& acc, const Density& d, std::size_t row,
                       std::size_t col, double a, double b, const Box& window,
                       double tol, bool allow_cdf) {
  if (allow_cdf && d.has_cdf()) {
    acc.entries(row, col) += cdf_mass(d, a, b);
    acc.err[col] += 1e-14;
    return;
  }
  const double lo = std::max(a, window.lo[0]);
  const double hi = std::min(b, window.hi[0]);
  if (!(lo < hi)) return;
  std::vector<double> breaks{lo};
  for (double k : density_breakpoints(d))
    if (k > lo && k < hi) breaks.push_back(k);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  const QuadResult r = integrate_pieces([&](double x) { return d(x); }, breaks, tol);
  acc.entries(row, col) += r.value;
  acc.err[col] += r.error + 1e-14;
  acc.used_quadrature = true;
}

// --- 1-d deterministic builders ---------------------------------------------

ConfusionMatrix finish_deterministic(ColumnAccum& acc) {
  const double tol =
      std::max(1e-12, *std::max_element(acc.err.begin(), acc.err.end()));
  if (tol > 1e-6)
    throw non_convergence("confusion-matrix integration tolerance not met");
  return make_confusion(std::move(acc.entries), tol,
                        acc.used_quadrature ? ConfusionMethod::Quadrature
                                            : ConfusionMethod::ClosedForm);
}

ConfusionMatrix build_cutpoints(const ClassModel& model, const CutPoints1D& cp,
                                const IntegrationSettings& s, bool allow_cdf) {
  const std::size_t c = model.size();
  const Box window = model.support();
  ColumnAccum acc{Eigen::MatrixXd::Zero(c, c), std::vector<double>(c, 0.0), false};
  for (std::size_t i = 0; i <= cp.cuts.size(); ++i) {
    const double a = i == 0 ? -inf : cp.cuts[i - 1];
    const double b = i == cp.cuts.size() ? inf : cp.cuts[i];
    const std::size_t row = cp.order.empty() ? i : cp.order[i];
    for (std::size_t k = 0; k < c; ++k)
      add_interval_mass(acc, model.density(k), row, k, a, b, window, s.quad_tol,
                        allow_cdf);
  }
  return finish_deterministic(acc);
}

ConfusionMatrix build_scan_1d(const ClassModel& model, const Partition& part,
                              const IntegrationSettings& s, bool allow_cdf) {
  const std::size_t c = model.size();
  const Box window = model.support();
  std::vector<double> forced = partition_breakpoints(part);
  for (std::size_t k = 0; k < c; ++k) {
    const auto br = density_breakpoints(model.density(k));
    forced.insert(forced.end(), br.begin(), br.end());
  }
  const auto segments = segment_by_label(
      [&](double x) { return static_cast<int>(part.assign(model, x)); },
      window.lo[0], window.hi[0], std::move(forced), s.scan_grid);

  ColumnAccum acc{Eigen::MatrixXd::Zero(c, c), std::vector<double>(c, 0.0), false};
  for (std::size_t i = 0; i < segments.size(); ++i) {
    // The outermost labels persist beyond the window, where only negligible
    // tail mass lives; extend them so columns account for (almost) all of it.
    const double a = i == 0 ? -inf : segments[i].lo;
    const double b = i + 1 == segments.size() ? inf : segments[i].hi;
    const auto row = static_cast<std::size_t>(segments[i].label);
    for (std::size_t k = 0; k < c; ++k)
      add_interval_mass(acc, model.density(k), row, k, a, b, window, s.quad_tol,
                        allow_cdf);
  }
  for (auto& e : acc.err) e += 1e-12 * static_cast<double>(segments.size());
  return finish_deterministic(acc);
}

// --- 2-d diagonal-Gaussian ratio builder ------------------------------------

bool ratio_level_of(const Partition& part, double& t, bool& tie_to_first) {
  if (const auto* rt = part.get_if<RatioThreshold>()) {
    t = rt->t;
    tie_to_first = rt->boundary_to == 0;
    return true;
  }
  if (const auto* bayes = part.get_if<BayesRule>()) {
    if (bayes->q.size() == 2 && bayes->q[0] > 0.0) {
      t = bayes->q[1] / bayes->q[0];
      tie_to_first = true;  // ties go to the lowest index
      return true;
    }
  }
  return false;
}

ConfusionMatrix build_gauss2d(const ClassModel& model,
                              const detail::DiagGauss2& g1,
                              const detail::DiagGauss2& g2, double t,
                              bool tie_to_first, const IntegrationSettings& s) {
  (void)model;
  if (t == 0.0)
    throw config_error("2-d ratio integration needs a positive threshold");
  const detail::RatioQuadratic quad(g1, g2, std::log(t));
  const detail::DiagGauss2* cls[2] = {&g1, &g2};

  ColumnAccum acc{Eigen::MatrixXd::Zero(2, 2), std::vector<double>(2, 0.0), true};
  for (std::size_t k = 0; k < 2; ++k) {
    const detail::DiagGauss2& g = *cls[k];
    const double lo = g.mx - 8.5 * g.sx;
    const double hi = g.mx + 8.5 * g.sx;
    for (std::size_t row = 0; row < 2; ++row) {
      auto f = [&](double x) {
        const double m0 =
            detail::upper_set_mass(quad.A, quad.B, quad.C(x), g.my, g.sy,
                                   tie_to_first);
        return detail::marginal_x(g, x) * (row == 0 ? m0 : 1.0 - m0);
      };
      const QuadResult r = integrate(f, lo, hi, s.quad_tol);
      acc.entries(row, k) = r.value;
      acc.err[k] += r.error + 1e-12;
    }
  }
  return finish_deterministic(acc);
}

// --- Monte Carlo builder -----------------------------------------------------

ConfusionMatrix build_mc(const ClassModel& model, const Partition& part,
                         const IntegrationSettings& s) {
  const std::size_t c = model.size();
  const std::size_t n = model.dim();
  if (s.mc_samples == 0) throw config_error("mc_samples must be positive");

  constexpr std::size_t chunk = 65536;
  const std::size_t chunks_per_class = (s.mc_samples + chunk - 1) / chunk;
  const std::size_t tasks = c * chunks_per_class;
  std::vector<std::vector<long long>> counts(tasks,
                                             std::vector<long long>(c, 0));

#pragma omp parallel for schedule(dynamic) if (s.parallel)
  for (long long ti = 0; ti < static_cast<long long>(tasks); ++ti) {
    const std::size_t k = static_cast<std::size_t>(ti) / chunks_per_class;
    const std::size_t ci = static_cast<std::size_t>(ti) % chunks_per_class;
    const std::size_t begin = ci * chunk;
    const std::size_t end = std::min(begin + chunk, s.mc_samples);
    RandomStream rs = RandomStream::derive(s.seed, k, ci);
    std::vector<double> buf(n);
    auto& local = counts[ti];
    for (std::size_t i = begin; i < end; ++i) {
      model.density(k).sample_into(rs, buf);
      local[part.assign(model, buf)]++;
    }
  }

  Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(c, c);
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<long long> total(c, 0);
    for (std::size_t ci = 0; ci < chunks_per_class; ++ci)
      for (std::size_t j = 0; j < c; ++j)
        total[j] += counts[k * chunks_per_class + ci][j];
    for (std::size_t j = 0; j < c; ++j)
      entries(j, k) =
          static_cast<double>(total[j]) / static_cast<double>(s.mc_samples);
  }
  const double tol =
      std::max(1e-12, 1.5 / std::sqrt(static_cast<double>(s.mc_samples)));
  return make_confusion(std::move(entries), tol, ConfusionMethod::MonteCarlo);
}

bool all_have_cdf(const ClassModel& model) {
  for (std::size_t k = 0; k < model.size(); ++k)
    if (!model.density(k).has_cdf()) return false;
  return true;
}

bool all_integrable_1d(const ClassModel& model) {
  for (std::size_t k = 0; k < model.size(); ++k)
    if (!model.density(k).has_cdf() && !model.density(k).evaluable())
      return false;
  return true;
}

} // namespace

ConfusionMatrix make_confusion(Eigen::MatrixXd entries, double tol,
                               ConfusionMethod method) {
  if (entries.rows() != entries.cols() || entries.rows() < 2)
    throw config_error("confusion matrices must be square with c >= 2");
  for (Eigen::Index j = 0; j < entries.cols(); ++j) {
    for (Eigen::Index i = 0; i < entries.rows(); ++i) {
      if (!std::isfinite(entries(i, j)))
        throw property_violation("confusion entry is not finite");
      if (entries(i, j) < -1e-9)
        throw property_violation("confusion entry is negative");
      entries(i, j) = std::clamp(entries(i, j), 0.0, 1.0);
    }
    const double sum = entries.col(j).sum();
    if (std::fabs(sum - 1.0) > tol)
      throw property_violation("confusion column " + std::to_string(j + 1) +
                               " sums to " + std::to_string(sum) +
                               ", outside tolerance");
  }
  return ConfusionMatrix{std::move(entries), tol, method};
}

ConfusionMatrix confusion_matrix(const ClassModel& model, const Partition& part,
                                 const IntegrationSettings& settings) {
  part.validate_for(model);
  const auto req = settings.method;

  if (req == MethodRequest::MonteCarlo) return build_mc(model, part, settings);

  const bool want_closed = req == MethodRequest::ClosedForm;
  const bool want_quad = req == MethodRequest::Quadrature;

  if (model.dim() == 1 && all_integrable_1d(model)) {
    const bool allow_cdf = !want_quad;
    if (want_closed && !all_have_cdf(model))
      throw config_error("closed-form confusion needs cdf-bearing densities");
    ConfusionMatrix out =
        part.get_if<CutPoints1D>()
            ? build_cutpoints(model, *part.get_if<CutPoints1D>(), settings, allow_cdf)
            : build_scan_1d(model, part, settings, allow_cdf);
    if (want_closed && out.method != ConfusionMethod::ClosedForm)
      throw config_error("closed-form confusion not available for this model");
    return out;
  }

  if (model.dim() == 2 && model.size() == 2) {
    detail::DiagGauss2 g1, g2;
    double t = 1.0;
    bool tie_first = true;
    if (as_diag_gauss2(model.density(0), g1) &&
        as_diag_gauss2(model.density(1), g2) &&
        ratio_level_of(part, t, tie_first) && t > 0.0) {
      if (want_closed)
        throw config_error(
            "2-d confusion is semi-analytic (quadrature), not closed form");
      return build_gauss2d(model, g1, g2, t, tie_first, settings);
    }
  }

  if (want_closed || want_quad)
    throw config_error(
        "deterministic confusion integration is not available for this "
        "model/partition; use Monte Carlo");
  return build_mc(model, part, settings);
}

ConfusionMatrix empirical_confusion(
    const ClassModel& model, const Partition& part,
    const std::vector<std::vector<double>>& class_points) {
  part.validate_for(model);
  const std::size_t c = model.size();
  const std::size_t n = model.dim();
  if (class_points.size() != c)
    throw config_error("need one point set per class");

  Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(c, c);
  double tol = 1e-12;
  for (std::size_t k = 0; k < c; ++k) {
    const auto& pts = class_points[k];
    if (pts.empty() || pts.size() % n != 0)
      throw config_error("class " + model.label(k) +
                         ": point array must be a whole number of rows");
    const std::size_t m = pts.size() / n;
    for (std::size_t i = 0; i < m; ++i) {
      const std::span<const double> row(pts.data() + i * n, n);
      entries(static_cast<Eigen::Index>(part.assign(model, row)),
              static_cast<Eigen::Index>(k)) += 1.0;
    }
    entries.col(k) /= static_cast<double>(m);
    tol = std::max(tol, 1.5 / std::sqrt(static_cast<double>(m)));
  }
  return make_confusion(std::move(entries), tol, ConfusionMethod::Empirical);
}

// --- spectral reports --------------------------------------------------------

GershgorinReport gershgorin(const ConfusionMatrix& p) {
  const auto c = p.entries.cols();
  if (c > 50)
    throw unsupported_operation("dense spectral analysis is limited to c <= 50");
  GershgorinReport rep;
  rep.radii.resize(c);
  for (Eigen::Index j = 0; j < c; ++j)
    rep.radii(j) = p.entries.col(j).sum() - p.entries(j, j);
  rep.rho_max = rep.radii.maxCoeff();
  for (Eigen::Index j = 0; j < c; ++j)
    if (rep.radii(j) == rep.rho_max) {
      rep.argmax_column = static_cast<std::size_t>(j);
      break;
    }
  rep.diagonally_dominant = p.entries.diagonal().minCoeff() > 0.5;

  const Eigen::MatrixXd i_minus_p =
      Eigen::MatrixXd::Identity(c, c) - p.entries;
  rep.spectral_radius_i_minus_p =
      Eigen::EigenSolver<Eigen::MatrixXd>(i_minus_p, false)
          .eigenvalues().cwiseAbs().maxCoeff();
  rep.min_abs_eigenvalue = Eigen::EigenSolver<Eigen::MatrixXd>(p.entries, false)
                               .eigenvalues().cwiseAbs().minCoeff();
  const auto sv = Eigen::JacobiSVD<Eigen::MatrixXd>(p.entries).singularValues();
  const double smin = sv(sv.size() - 1);
  rep.inv_two_norm_sq = smin > 0.0 ? 1.0 / (smin * smin) : inf;
  return rep;
}

Eigen::MatrixXd invert(const ConfusionMatrix& p, bool force) {
  const auto c = p.entries.cols();
  if (!force && !(p.entries.diagonal().minCoeff() > 0.5))
    throw property_violation(
        "confusion matrix is not diagonally dominant (min diagonal <= 1/2); "
        "its inverse is not certified");
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(c, c);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(p.entries);
  Eigen::MatrixXd x = lu.solve(ident);
  double resid = (p.entries * x - ident).cwiseAbs().maxCoeff();
  if (resid > 1e-12) {
    x += x * (ident - p.entries * x);  // one Newton refinement step
    resid = (p.entries * x - ident).cwiseAbs().maxCoeff();
  }
  if (!(resid <= 1e-12))
    throw property_violation("matrix inverse residual " + std::to_string(resid) +
                             " exceeds 1e-12; matrix is too ill-conditioned");
  return x;
}

// --- 1-d decomposition -------------------------------------------------------

std::vector<LabelledInterval> segment_by_label(
    const std::function<int(double)>& label, double lo, double hi,
    std::vector<double> forced, std::size_t grid_n) {
  if (!(lo < hi)) throw config_error("segment_by_label needs lo < hi");
  if (grid_n < 2) grid_n = 2;

  std::sort(forced.begin(), forced.end());
  std::vector<double> edges{lo};
  for (double f : forced)
    if (f > lo && f < hi && f != edges.back()) edges.push_back(f);
  edges.push_back(hi);

  // Refine every gap to at most the base grid step.
  const double step = (hi - lo) / static_cast<double>(grid_n);
  std::vector<double> xs;
  xs.reserve(grid_n + edges.size());
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    const auto m = static_cast<std::size_t>(std::ceil((b - a) / step));
    const std::size_t pieces = std::max<std::size_t>(1, m);
    for (std::size_t k = 0; k < pieces; ++k)
      xs.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(pieces));
  }
  xs.push_back(hi);

  std::vector<int> labels(xs.size() - 1);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    labels[i] = label(0.5 * (xs[i] + xs[i + 1]));

  const double width_tol = 1e-13 * std::max({1.0, std::fabs(lo), std::fabs(hi)});
  std::vector<LabelledInterval> out;
  double start = lo;
  for (std::size_t i = 0; i + 1 < labels.size(); ++i) {
    if (labels[i] == labels[i + 1]) continue;
    double a = 0.5 * (xs[i] + xs[i + 1]);
    double b = 0.5 * (xs[i + 1] + xs[i + 2]);
    while (b - a > width_tol) {
      const double m = 0.5 * (a + b);
      (label(m) == labels[i] ? a : b) = m;
    }
    const double boundary = 0.5 * (a + b);
    if (!out.empty() && out.back().label == labels[i])
      out.back().hi = boundary;
    else
      out.push_back({start, boundary, labels[i]});
    start = boundary;
  }
  if (!out.empty() && out.back().label == labels.back())
    out.back().hi = hi;
  else
    out.push_back({start, hi, labels.back()});
  return out;
}

std::vector<double> density_breakpoints(const Density& d) {
  std::vector<double> out;
  if (const auto* u = d.get_if<UniformInterval>()) {
    out = {u->lo, u->hi};
  } else if (const auto* p = d.get_if<PiecewiseUniform>()) {
    for (const auto& s : p->segments) {
      out.push_back(s.lo);
      out.push_back(s.hi);
    }
  } else if (const auto* s = d.get_if<SmoothedPiecewiseUniform>()) {
    for (const auto& seg : s->segments) {
      out.push_back(seg.lo);
      out.push_back(seg.hi);
    }
  } else if (const auto* w = d.get_if<Weibull>()) {
    (void)w;
    out = {0.0};
  } else if (const auto* g = d.get_if<GridDensity>()) {
    if (g->axes.size() == 1) out = g->axes[0];
  } else if (const auto* m = d.get_if<Mixture>()) {
    for (const auto& comp : m->components) {
      const auto br = density_breakpoints(comp);
      out.insert(out.end(), br.begin(), br.end());
    }
  }
  return out;
}

std::vector<double> partition_breakpoints(const Partition& part) {
  if (const auto* cp = part.get_if<CutPoints1D>()) return cp->cuts;
  if (const auto* bs = part.get_if<BoundarySplitThreshold>()) {
    std::vector<double> out;
    for (const auto& iv : bs->to_first) {
      out.push_back(iv.lo);
      out.push_back(iv.hi);
    }
    return out;
  }
  return {};
}

} // namespace rhomax
