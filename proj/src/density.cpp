#include "rhomax/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rhomax/integrate.hpp"
#include "rhomax/mathutil.hpp"

namespace rhomax {

namespace {

constexpr double tail_sds = 8.5;  // Gaussian window half-width, tail < 1e-16
constexpr double inf = std::numeric_limits<double>::infinity();

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw config_error(std::string(what) + " must be finite");
}

// Sample s in [0, 1] from the linear density with endpoint values d0, d1 >= 0
// by inverting its cdf: solves (d1-d0)/2 * s^2 + d0 * s = u * (d0+d1)/2.
double linear_inverse(double d0, double d1, double u) {
  const double total = 0.5 * (d0 + d1);
  if (total <= 0.0) return u;
  const double target = u * total;
  const double a = 0.5 * (d1 - d0);
  const double denom = d0 + std::sqrt(std::max(0.0, d0 * d0 + 4.0 * a * target));
  const double s = denom > 0.0 ? 2.0 * target / denom : u;
  return std::clamp(s, 0.0, 1.0);
}

void validate_segments(const std::vector<UniformSegment>& segs) {
  if (segs.empty())
    throw config_error("piecewise-uniform density needs at least one segment");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    require_finite(segs[i].lo, "segment bound");
    require_finite(segs[i].hi, "segment bound");
    require_finite(segs[i].height, "segment height");
    if (!(segs[i].lo < segs[i].hi))
      throw config_error("segment bounds must satisfy lo < hi");
    if (!(segs[i].height > 0.0))
      throw config_error("segment heights must be positive");
    if (i > 0 && segs[i].lo < segs[i - 1].hi - 1e-15)
      throw config_error("segments must be sorted and non-overlapping");
  }
}

double segment_mass(const std::vector<UniformSegment>& segs) {
  double m = 0.0;
  for (const auto& s : segs) m += s.height * (s.hi - s.lo);
  return m;
}

void normalize_segments(std::vector<UniformSegment>& segs) {
  validate_segments(segs);
  const double m = segment_mass(segs);
  if (std::fabs(m - 1.0) > 1e-9)
    throw config_error("piecewise-uniform density must integrate to 1 (got mass " +
                       std::to_string(m) + ")");
  for (auto& s : segs) s.height /= m;
}

double piecewise_eval(const std::vector<UniformSegment>& segs, double x) {
  for (const auto& s : segs) {
    if (x < s.lo) return 0.0;
    if (x <= s.hi) return s.height;
  }
  return 0.0;
}

double piecewise_cdf(const std::vector<UniformSegment>& segs, double x) {
  double acc = 0.0;
  for (const auto& s : segs) {
    if (x <= s.lo) return acc;
    acc += s.height * (std::min(x, s.hi) - s.lo);
    if (x <= s.hi) return acc;
  }
  return acc;
}

double piecewise_sample(const std::vector<UniformSegment>& segs, double u) {
  double target = u * segment_mass(segs);
  for (const auto& s : segs) {
    const double m = s.height * (s.hi - s.lo);
    if (target <= m) return std::min(s.hi, s.lo + target / s.height);
    target -= m;
  }
  return segs.back().hi;
}

double smoothed_eval(const SmoothedPiecewiseUniform& d, double x) {
  double acc = 0.0;
  for (const auto& s : d.segments)
    acc += s.height *
           (norm_cdf((x - s.lo) / d.sigma) - norm_cdf((x - s.hi) / d.sigma));
  return acc;
}

double smoothed_cdf(const SmoothedPiecewiseUniform& d, double x) {
  double acc = 0.0;
  for (const auto& s : d.segments)
    acc += s.height * d.sigma *
           (norm_cdf_antideriv((x - s.lo) / d.sigma) -
            norm_cdf_antideriv((x - s.hi) / d.sigma));
  return acc;
}

// --- grid helpers ---------------------------------------------------------

// Voronoi cell widths for nearest-neighbour interpolation.
std::vector<double> nearest_widths(const std::vector<double>& knots) {
  const std::size_t n = knots.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = i == 0 ? knots[0] : 0.5 * (knots[i - 1] + knots[i]);
    const double hi = i + 1 == n ? knots[n - 1] : 0.5 * (knots[i] + knots[i + 1]);
    w[i] = hi - lo;
  }
  return w;
}

// Per-cell masses of the interpolant, in a fixed row-major order.
std::vector<double> grid_cell_masses(const GridDensity& g) {
  std::vector<double> cells;
  if (g.axes.size() == 1) {
    const auto& x = g.axes[0];
    if (g.interp == GridInterp::Multilinear) {
      cells.resize(x.size() - 1);
      for (std::size_t i = 0; i + 1 < x.size(); ++i)
        cells[i] = 0.5 * (g.values[i] + g.values[i + 1]) * (x[i + 1] - x[i]);
    } else {
      const auto w = nearest_widths(x);
      cells.resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) cells[i] = g.values[i] * w[i];
    }
  } else {
    const auto& x = g.axes[0];
    const auto& y = g.axes[1];
    const std::size_t ny = y.size();
    auto at = [&](std::size_t i, std::size_t j) { return g.values[i * ny + j]; };
    if (g.interp == GridInterp::Multilinear) {
      cells.resize((x.size() - 1) * (ny - 1));
      for (std::size_t i = 0; i + 1 < x.size(); ++i)
        for (std::size_t j = 0; j + 1 < ny; ++j)
          cells[i * (ny - 1) + j] =
              0.25 * (at(i, j) + at(i + 1, j) + at(i, j + 1) + at(i + 1, j + 1)) *
              (x[i + 1] - x[i]) * (y[j + 1] - y[j]);
    } else {
      const auto wx = nearest_widths(x);
      const auto wy = nearest_widths(y);
      cells.resize(x.size() * ny);
      for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < ny; ++j)
          cells[i * ny + j] = at(i, j) * wx[i] * wy[j];
    }
  }
  return cells;
}

void normalize_grid(GridDensity& g) {
  if (g.axes.empty() || g.axes.size() > 2)
    throw config_error("grid densities support one or two axes");
  std::size_t lattice = 1;
  for (const auto& ax : g.axes) {
    if (ax.size() < 2) throw config_error("grid axes need at least two knots");
    for (std::size_t i = 0; i < ax.size(); ++i) {
      require_finite(ax[i], "grid knot");
      if (i > 0 && !(ax[i] > ax[i - 1]))
        throw config_error("grid knots must be strictly increasing");
    }
    lattice *= ax.size();
  }
  if (g.values.size() != lattice)
    throw config_error("grid value count does not match the knot lattice");
  for (double v : g.values) {
    require_finite(v, "grid value");
    if (v < 0.0) throw config_error("grid values must be non-negative");
  }

  auto cells = grid_cell_masses(g);
  const double mass = std::accumulate(cells.begin(), cells.end(), 0.0);
  if (std::fabs(mass - 1.0) > 1e-3)
    throw config_error("grid density mass " + std::to_string(mass) +
                       " is too far from 1 to renormalize");
  for (auto& v : g.values) v /= mass;

  g.cell_prefix.assign(cells.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    acc += cells[i] / mass;
    g.cell_prefix[i] = acc;
  }
}

// Cell index such that knots[c] <= v < knots[c+1], clamped to valid cells.
std::size_t locate_cell(const std::vector<double>& knots, double v) {
  const auto it = std::upper_bound(knots.begin(), knots.end(), v);
  const std::size_t idx = it == knots.begin() ? 1 : (it - knots.begin());
  return std::min(idx - 1, knots.size() - 2);
}

std::size_t nearest_knot(const std::vector<double>& knots, double v) {
  const std::size_t c = locate_cell(knots, v);
  return (v - knots[c] <= knots[c + 1] - v) ? c : c + 1;
}

double grid_eval(const GridDensity& g, std::span<const double> r) {
  for (std::size_t a = 0; a < g.axes.size(); ++a)
    if (r[a] < g.axes[a].front() || r[a] > g.axes[a].back()) return 0.0;
  if (g.axes.size() == 1) {
    const auto& x = g.axes[0];
    if (g.interp == GridInterp::Nearest) return g.values[nearest_knot(x, r[0])];
    const std::size_t c = locate_cell(x, r[0]);
    const double s = (r[0] - x[c]) / (x[c + 1] - x[c]);
    return g.values[c] + s * (g.values[c + 1] - g.values[c]);
  }
  const auto& x = g.axes[0];
  const auto& y = g.axes[1];
  const std::size_t ny = y.size();
  auto at = [&](std::size_t i, std::size_t j) { return g.values[i * ny + j]; };
  if (g.interp == GridInterp::Nearest)
    return at(nearest_knot(x, r[0]), nearest_knot(y, r[1]));
  const std::size_t i = locate_cell(x, r[0]);
  const std::size_t j = locate_cell(y, r[1]);
  const double s = (r[0] - x[i]) / (x[i + 1] - x[i]);
  const double t = (r[1] - y[j]) / (y[j + 1] - y[j]);
  const double v0 = at(i, j) + s * (at(i + 1, j) - at(i, j));
  const double v1 = at(i, j + 1) + s * (at(i + 1, j + 1) - at(i, j + 1));
  return v0 + t * (v1 - v0);
}

double grid_cdf(const GridDensity& g, double v) {
  const auto& x = g.axes[0];
  if (v <= x.front()) return 0.0;
  if (v >= x.back()) return g.cell_prefix.back();
  if (g.interp == GridInterp::Multilinear) {
    const std::size_t c = locate_cell(x, v);
    const double before = c == 0 ? 0.0 : g.cell_prefix[c - 1];
    const double h = x[c + 1] - x[c];
    const double dx = v - x[c];
    const double slope = (g.values[c + 1] - g.values[c]) / h;
    return before + g.values[c] * dx + 0.5 * slope * dx * dx;
  }
  // Nearest: piecewise-constant over Voronoi cells of the knots.
  const std::size_t k = nearest_knot(x, v);
  const double before = k == 0 ? 0.0 : g.cell_prefix[k - 1];
  const double cell_lo = k == 0 ? x[0] : 0.5 * (x[k - 1] + x[k]);
  return before + g.values[k] * (v - cell_lo);
}

void grid_sample(const GridDensity& g, RandomStream& rs, std::span<double> out) {
  const auto& prefix = g.cell_prefix;
  const double target = rs.uniform() * prefix.back();
  const std::size_t cell =
      std::upper_bound(prefix.begin(), prefix.end(), target) - prefix.begin();
  const std::size_t c = std::min(cell, prefix.size() - 1);
  const double before = c == 0 ? 0.0 : prefix[c - 1];
  const double in_cell = prefix[c] - before;
  const double u = in_cell > 0.0 ? (target - before) / in_cell : 0.5;

  if (g.axes.size() == 1) {
    const auto& x = g.axes[0];
    if (g.interp == GridInterp::Multilinear) {
      const double s = linear_inverse(g.values[c], g.values[c + 1], u);
      out[0] = x[c] + s * (x[c + 1] - x[c]);
    } else {
      const double lo = c == 0 ? x[0] : 0.5 * (x[c - 1] + x[c]);
      const double hi = c + 1 == x.size() ? x.back() : 0.5 * (x[c] + x[c + 1]);
      out[0] = lo + u * (hi - lo);
    }
    return;
  }

  const auto& x = g.axes[0];
  const auto& y = g.axes[1];
  const std::size_t ny = y.size();
  auto at = [&](std::size_t i, std::size_t j) { return g.values[i * ny + j]; };
  if (g.interp == GridInterp::Multilinear) {
    const std::size_t i = c / (ny - 1);
    const std::size_t j = c % (ny - 1);
    const double s =
        linear_inverse(at(i, j) + at(i, j + 1), at(i + 1, j) + at(i + 1, j + 1),
                       rs.uniform());
    const double d0 = at(i, j) + s * (at(i + 1, j) - at(i, j));
    const double d1 = at(i, j + 1) + s * (at(i + 1, j + 1) - at(i, j + 1));
    const double t = linear_inverse(d0, d1, rs.uniform());
    out[0] = x[i] + s * (x[i + 1] - x[i]);
    out[1] = y[j] + t * (y[j + 1] - y[j]);
  } else {
    const std::size_t i = c / ny;
    const std::size_t j = c % ny;
    const double xlo = i == 0 ? x[0] : 0.5 * (x[i - 1] + x[i]);
    const double xhi = i + 1 == x.size() ? x.back() : 0.5 * (x[i] + x[i + 1]);
    const double ylo = j == 0 ? y[0] : 0.5 * (y[j - 1] + y[j]);
    const double yhi = j + 1 == ny ? y.back() : 0.5 * (y[j] + y[j + 1]);
    out[0] = xlo + u * (xhi - xlo);
    out[1] = ylo + rs.uniform() * (yhi - ylo);
  }
}

} // namespace

// --- Box -------------------------------------------------------------------

Box Box::unite(const Box& a, const Box& b) {
  if (a.dim() != b.dim())
    throw config_error("cannot unite windows of different dimension");
  Box out = a;
  for (std::size_t i = 0; i < out.dim(); ++i) {
    out.lo[i] = std::min(out.lo[i], b.lo[i]);
    out.hi[i] = std::max(out.hi[i], b.hi[i]);
  }
  return out;
}

// --- NoiseSpec ---------------------------------------------------------------

NoiseSpec::NoiseSpec(double varsigma2, Eigen::MatrixXd shape)
    : varsigma2_(varsigma2), shape_(std::move(shape)) {
  require_finite(varsigma2_, "noise magnitude");
  if (varsigma2_ < 0.0) throw config_error("noise magnitude must be >= 0");
  if (shape_.rows() != shape_.cols() || shape_.rows() < 1)
    throw config_error("noise shape matrix must be square");
  if ((shape_ - shape_.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * (1.0 + shape_.cwiseAbs().maxCoeff()))
    throw config_error("noise shape matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shape_);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw config_error("noise shape matrix must be positive definite");
  if (std::fabs(es.eigenvalues().maxCoeff() - 1.0) > 1e-9)
    throw config_error(
        "noise shape matrix must be normalized to largest eigenvalue 1");
}

NoiseSpec NoiseSpec::isotropic(std::size_t dim, double varsigma2) {
  return NoiseSpec(varsigma2,
                   Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                             static_cast<Eigen::Index>(dim)));
}

double NoiseSpec::scale() const { return std::sqrt(varsigma2_); }

// --- Density construction ----------------------------------------------------

Density::Density(Variant v) : v_(std::move(v)) {
  if (auto* g = std::get_if<Gaussian1D>(&v_)) {
    require_finite(g->mean, "mean");
    require_finite(g->sd, "standard deviation");
    if (!(g->sd > 0.0)) throw config_error("standard deviation must be positive");
    dim_ = 1;
  } else if (auto* gn = std::get_if<GaussianNd>(&v_)) {
    const auto n = gn->mean.size();
    if (n < 1 || gn->cov.rows() != n || gn->cov.cols() != n)
      throw config_error("mean and covariance dimensions do not match");
    if ((gn->cov - gn->cov.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * (1.0 + gn->cov.cwiseAbs().maxCoeff()))
      throw config_error("covariance must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(gn->cov);
    if (llt.info() != Eigen::Success)
      throw config_error("covariance must be positive definite");
    gn->chol = llt.matrixL();
    gn->cov_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(gn->chol(i, i));
    gn->log_norm = -0.5 * (static_cast<double>(n) * std::log(2.0 * M_PI) + log_det);
    dim_ = static_cast<std::size_t>(n);
  } else if (auto* w = std::get_if<Weibull>(&v_)) {
    require_finite(w->shape, "shape");
    require_finite(w->scale, "scale");
    if (!(w->shape > 0.0) || !(w->scale > 0.0))
      throw config_error("Weibull shape and scale must be positive");
    dim_ = 1;
  } else if (auto* u = std::get_if<UniformInterval>(&v_)) {
    require_finite(u->lo, "interval bound");
    require_finite(u->hi, "interval bound");
    if (!(u->lo < u->hi)) throw config_error("interval bounds must satisfy lo < hi");
    dim_ = 1;
  } else if (auto* p = std::get_if<PiecewiseUniform>(&v_)) {
    normalize_segments(p->segments);
    dim_ = 1;
  } else if (auto* s = std::get_if<SmoothedPiecewiseUniform>(&v_)) {
    require_finite(s->sigma, "smoothing width");
    if (!(s->sigma > 0.0)) throw config_error("smoothing width must be positive");
    normalize_segments(s->segments);
    dim_ = 1;
  } else if (auto* m = std::get_if<Mixture>(&v_)) {
    if (m->components.empty() || m->weights.size() != m->components.size())
      throw config_error("mixture weights and components must match and be non-empty");
    double wsum = 0.0;
    for (double wgt : m->weights) {
      require_finite(wgt, "mixture weight");
      if (wgt < 0.0) throw config_error("mixture weights must be non-negative");
      wsum += wgt;
    }
    if (std::fabs(wsum - 1.0) > 1e-9)
      throw config_error("mixture weights must sum to 1");
    for (auto& wgt : m->weights) wgt /= wsum;
    dim_ = m->components.front().dim();
    for (const auto& comp : m->components)
      if (comp.dim() != dim_)
        throw config_error("mixture components must share one dimension");
  } else if (auto* g2 = std::get_if<GridDensity>(&v_)) {
    normalize_grid(*g2);
    dim_ = g2->axes.size();
  } else if (auto* e = std::get_if<Empirical>(&v_)) {
    if (e->dim < 1) throw config_error("empirical density dimension must be >= 1");
    if (e->points.empty() || e->points.size() % e->dim != 0)
      throw config_error("empirical point array must be a whole number of rows");
    for (double p : e->points) require_finite(p, "empirical point");
    dim_ = e->dim;
  }
}

bool Density::evaluable() const {
  if (std::holds_alternative<Empirical>(v_)) return false;
  if (const auto* m = std::get_if<Mixture>(&v_)) {
    for (const auto& comp : m->components)
      if (!comp.evaluable()) return false;
  }
  return true;
}

bool Density::has_cdf() const {
  if (dim_ != 1) return false;
  if (std::holds_alternative<Empirical>(v_) ||
      std::holds_alternative<GaussianNd>(v_))
    return false;
  if (const auto* m = std::get_if<Mixture>(&v_)) {
    for (const auto& comp : m->components)
      if (!comp.has_cdf()) return false;
  }
  return true;
}

double Density::operator()(double x) const {
  return (*this)(std::span<const double>(&x, 1));
}

double Density::operator()(std::span<const double> r) const {
  if (r.size() != dim_)
    throw config_error("evaluation point dimension does not match density");
  if (const auto* g = std::get_if<Gaussian1D>(&v_))
    return norm_pdf((r[0] - g->mean) / g->sd) / g->sd;
  if (std::holds_alternative<GaussianNd>(v_) ||
      std::holds_alternative<Weibull>(v_)) {
    const double l = log_eval(r);
    return l == -inf ? 0.0 : std::exp(l);
  }
  if (const auto* u = std::get_if<UniformInterval>(&v_))
    return (r[0] >= u->lo && r[0] <= u->hi) ? 1.0 / (u->hi - u->lo) : 0.0;
  if (const auto* p = std::get_if<PiecewiseUniform>(&v_))
    return piecewise_eval(p->segments, r[0]);
  if (const auto* s = std::get_if<SmoothedPiecewiseUniform>(&v_))
    return smoothed_eval(*s, r[0]);
  if (const auto* m = std::get_if<Mixture>(&v_)) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m->components.size(); ++i)
      if (m->weights[i] > 0.0) acc += m->weights[i] * m->components[i](r);
    return acc;
  }
  if (const auto* g2 = std::get_if<GridDensity>(&v_)) return grid_eval(*g2, r);
  throw unsupported_operation("empirical densities are sample-only");
}

double Density::log_eval(double x) const {
  return log_eval(std::span<const double>(&x, 1));
}

double Density::log_eval(std::span<const double> r) const {
  if (const auto* g = std::get_if<Gaussian1D>(&v_)) {
    const double z = (r[0] - g->mean) / g->sd;
    return -0.5 * z * z - std::log(g->sd) - 0.5 * std::log(2.0 * M_PI);
  }
  if (const auto* gn = std::get_if<GaussianNd>(&v_)) {
    if (r.size() != dim_)
      throw config_error("evaluation point dimension does not match density");
    Eigen::Map<const Eigen::VectorXd> x(r.data(), static_cast<Eigen::Index>(r.size()));
    const Eigen::VectorXd d = x - gn->mean;
    return gn->log_norm - 0.5 * d.dot(gn->cov_inv * d);
  }
  if (const auto* w = std::get_if<Weibull>(&v_)) {
    const double x = r[0];
    if (x < 0.0 || (x == 0.0 && w->shape != 1.0)) return -inf;
    if (x == 0.0) return -std::log(w->scale);
    const double z = x / w->scale;
    return std::log(w->shape / w->scale) + (w->shape - 1.0) * std::log(z) -
           std::pow(z, w->shape);
  }
  const double v = (*this)(r);
  return v > 0.0 ? std::log(v) : -inf;
}

double Density::cdf(double x) const {
  if (const auto* g = std::get_if<Gaussian1D>(&v_))
    return norm_cdf((x - g->mean) / g->sd);
  if (const auto* w = std::get_if<Weibull>(&v_)) {
    if (x <= 0.0) return 0.0;
    return -std::expm1(-std::pow(x / w->scale, w->shape));
  }
  if (const auto* u = std::get_if<UniformInterval>(&v_)) {
    if (x <= u->lo) return 0.0;
    if (x >= u->hi) return 1.0;
    return (x - u->lo) / (u->hi - u->lo);
  }
  if (const auto* p = std::get_if<PiecewiseUniform>(&v_))
    return piecewise_cdf(p->segments, x);
  if (const auto* s = std::get_if<SmoothedPiecewiseUniform>(&v_))
    return smoothed_cdf(*s, x);
  if (const auto* m = std::get_if<Mixture>(&v_)) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m->components.size(); ++i)
      if (m->weights[i] > 0.0) acc += m->weights[i] * m->components[i].cdf(x);
    return acc;
  }
  if (const auto* g2 = std::get_if<GridDensity>(&v_)) {
    if (dim_ == 1) return grid_cdf(*g2, x);
  }
  throw unsupported_operation("no closed-form cdf for this density");
}

Box Density::support() const {
  if (const auto* g = std::get_if<Gaussian1D>(&v_))
    return {{g->mean - tail_sds * g->sd}, {g->mean + tail_sds * g->sd}};
  if (const auto* gn = std::get_if<GaussianNd>(&v_)) {
    Box b;
    for (Eigen::Index i = 0; i < gn->mean.size(); ++i) {
      const double half = tail_sds * std::sqrt(gn->cov(i, i));
      b.lo.push_back(gn->mean(i) - half);
      b.hi.push_back(gn->mean(i) + half);
    }
    return b;
  }
  if (const auto* w = std::get_if<Weibull>(&v_)) {
    // Survival exp(-(x/scale)^shape) = 1e-14 at the upper edge.
    const double hi = w->scale * std::pow(14.0 * std::log(10.0), 1.0 / w->shape);
    return {{0.0}, {hi}};
  }
  if (const auto* u = std::get_if<UniformInterval>(&v_)) return {{u->lo}, {u->hi}};
  if (const auto* p = std::get_if<PiecewiseUniform>(&v_))
    return {{p->segments.front().lo}, {p->segments.back().hi}};
  if (const auto* s = std::get_if<SmoothedPiecewiseUniform>(&v_))
    return {{s->segments.front().lo - tail_sds * s->sigma},
            {s->segments.back().hi + tail_sds * s->sigma}};
  if (const auto* m = std::get_if<Mixture>(&v_)) {
    bool first = true;
    Box b;
    for (std::size_t i = 0; i < m->components.size(); ++i) {
      if (m->weights[i] <= 0.0) continue;
      const Box c = m->components[i].support();
      b = first ? c : Box::unite(b, c);
      first = false;
    }
    return b;
  }
  if (const auto* g2 = std::get_if<GridDensity>(&v_)) {
    Box b;
    for (const auto& ax : g2->axes) {
      b.lo.push_back(ax.front());
      b.hi.push_back(ax.back());
    }
    return b;
  }
  const auto& e = std::get<Empirical>(v_);
  Box b{std::vector<double>(e.dim, inf), std::vector<double>(e.dim, -inf)};
  for (std::size_t i = 0; i < e.count(); ++i)
    for (std::size_t a = 0; a < e.dim; ++a) {
      b.lo[a] = std::min(b.lo[a], e.points[i * e.dim + a]);
      b.hi[a] = std::max(b.hi[a], e.points[i * e.dim + a]);
    }
  return b;
}

double Density::mass(double tol) const {
  if (!evaluable())
    throw unsupported_operation("cannot integrate a sample-only density");
  if (const auto* m = std::get_if<Mixture>(&v_)) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m->components.size(); ++i)
      if (m->weights[i] > 0.0) acc += m->weights[i] * m->components[i].mass(tol);
    return acc;
  }
  if (const auto* gn = std::get_if<GaussianNd>(&v_)) {
    // Whitened, the mass factors into identical 1-d Gaussian integrals.
    const double one =
        integrate([](double z) { return norm_pdf(z); }, -tail_sds, tail_sds, tol)
            .value;
    return std::pow(one, static_cast<double>(gn->mean.size()));
  }
  if (const auto* g2 = std::get_if<GridDensity>(&v_)) {
    if (dim_ == 2) {
      const auto cells = grid_cell_masses(*g2);
      return std::accumulate(cells.begin(), cells.end(), 0.0);
    }
  }
  const Box b = support();
  std::vector<double> breaks{b.lo[0]};
  if (const auto* p = std::get_if<PiecewiseUniform>(&v_)) {
    for (const auto& s : p->segments) {
      breaks.push_back(s.lo);
      breaks.push_back(s.hi);
    }
  } else if (const auto* s = std::get_if<SmoothedPiecewiseUniform>(&v_)) {
    for (const auto& seg : s->segments) {
      breaks.push_back(seg.lo);
      breaks.push_back(seg.hi);
    }
  } else if (const auto* g2 = std::get_if<GridDensity>(&v_)) {
    for (double k : g2->axes[0]) breaks.push_back(k);
  }
  breaks.push_back(b.hi[0]);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return integrate_pieces([this](double x) { return (*this)(x); }, breaks, tol)
      .value;
}

void Density::sample_into(RandomStream& rs, std::span<double> out) const {
  if (out.size() != dim_)
    throw config_error("sample buffer dimension does not match density");
  if (const auto* g = std::get_if<Gaussian1D>(&v_)) {
    out[0] = g->mean + g->sd * rs.normal();
  } else if (const auto* gn = std::get_if<GaussianNd>(&v_)) {
    const auto n = gn->mean.size();
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rs.normal();
    Eigen::Map<Eigen::VectorXd>(out.data(), n) = gn->mean + gn->chol * z;
  } else if (const auto* w = std::get_if<Weibull>(&v_)) {
    out[0] = w->scale * std::pow(-std::log(rs.uniform_open()), 1.0 / w->shape);
  } else if (const auto* u = std::get_if<UniformInterval>(&v_)) {
    out[0] = u->lo + (u->hi - u->lo) * rs.uniform();
  } else if (const auto* p = std::get_if<PiecewiseUniform>(&v_)) {
    out[0] = piecewise_sample(p->segments, rs.uniform());
  } else if (const auto* s = std::get_if<SmoothedPiecewiseUniform>(&v_)) {
    out[0] = piecewise_sample(s->segments, rs.uniform()) + s->sigma * rs.normal();
  } else if (const auto* m = std::get_if<Mixture>(&v_)) {
    double u = rs.uniform();
    std::size_t pick = m->components.size() - 1;
    for (std::size_t i = 0; i < m->weights.size(); ++i) {
      if (u < m->weights[i]) {
        pick = i;
        break;
      }
      u -= m->weights[i];
    }
    m->components[pick].sample_into(rs, out);
  } else if (const auto* g2 = std::get_if<GridDensity>(&v_)) {
    grid_sample(*g2, rs, out);
  } else {
    const auto& e = std::get<Empirical>(v_);
    const std::size_t row = rs.below(e.count());
    for (std::size_t a = 0; a < e.dim; ++a) out[a] = e.points[row * e.dim + a];
  }
}

std::vector<double> Density::sample(std::uint64_t seed, std::size_t count) const {
  std::vector<double> out(count * dim_);
  RandomStream rs = RandomStream::derive(seed);
  for (std::size_t i = 0; i < count; ++i)
    sample_into(rs, std::span<double>(out.data() + i * dim_, dim_));
  return out;
}

Density Density::convolved(const NoiseSpec& noise, std::size_t grid_knots) const {
  if (noise.dim() != dim_)
    throw config_error("noise dimension does not match density");
  if (noise.varsigma2() == 0.0) return *this;

  if (const auto* g = std::get_if<Gaussian1D>(&v_)) {
    const double var = g->sd * g->sd + noise.covariance()(0, 0);
    return Density(Gaussian1D{g->mean, std::sqrt(var)});
  }
  if (const auto* gn = std::get_if<GaussianNd>(&v_)) {
    GaussianNd out;
    out.mean = gn->mean;
    out.cov = gn->cov + noise.covariance();
    return Density(std::move(out));
  }
  if (const auto* u = std::get_if<UniformInterval>(&v_)) {
    const double h = 1.0 / (u->hi - u->lo);
    return Density(SmoothedPiecewiseUniform{{{u->lo, u->hi, h}},
                                            std::sqrt(noise.covariance()(0, 0))});
  }
  if (const auto* p = std::get_if<PiecewiseUniform>(&v_))
    return Density(SmoothedPiecewiseUniform{p->segments,
                                            std::sqrt(noise.covariance()(0, 0))});
  if (const auto* s = std::get_if<SmoothedPiecewiseUniform>(&v_)) {
    const double var = s->sigma * s->sigma + noise.covariance()(0, 0);
    return Density(SmoothedPiecewiseUniform{s->segments, std::sqrt(var)});
  }
  if (const auto* m = std::get_if<Mixture>(&v_)) {
    Mixture out;
    out.weights = m->weights;
    for (const auto& comp : m->components)
      out.components.push_back(comp.convolved(noise, grid_knots));
    return Density(std::move(out));
  }

  if (!evaluable())
    throw unsupported_operation("cannot convolve a sample-only density");
  if (dim_ != 1)
    throw unsupported_operation(
        "numeric noise convolution is one-dimensional; use Gaussian densities "
        "in higher dimension");
  if (grid_knots < 8) throw config_error("convolution grid needs >= 8 knots");

  // Tabulate integral p(y) * N(x - y; 0, sigma^2) dy on a uniform grid.
  const double sigma = noise.scale();
  const Box sup = support();
  const double lo = sup.lo[0] - tail_sds * sigma;
  const double hi = sup.hi[0] + tail_sds * sigma;

  std::vector<double> kinks{sup.lo[0], sup.hi[0]};
  if (const auto* g2 = std::get_if<GridDensity>(&v_))
    kinks.assign(g2->axes[0].begin(), g2->axes[0].end());

  GridDensity out;
  out.axes = {std::vector<double>(grid_knots)};
  out.values.assign(grid_knots, 0.0);
  auto& knots = out.axes[0];
  const double step = (hi - lo) / static_cast<double>(grid_knots - 1);
  for (std::size_t i = 0; i < grid_knots; ++i)
    knots[i] = lo + step * static_cast<double>(i);
  knots.back() = hi;

#pragma omp parallel for schedule(dynamic)
  for (long long ii = 0; ii < static_cast<long long>(grid_knots); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const double x = knots[i];
    const double ylo = std::max(sup.lo[0], x - tail_sds * sigma);
    const double yhi = std::min(sup.hi[0], x + tail_sds * sigma);
    if (!(ylo < yhi)) continue;
    std::vector<double> breaks{ylo};
    for (double k : kinks)
      if (k > ylo && k < yhi) breaks.push_back(k);
    breaks.push_back(yhi);
    std::sort(breaks.begin(), breaks.end());
    out.values[i] =
        integrate_pieces(
            [&](double y) { return (*this)(y)*norm_pdf((x - y) / sigma) / sigma; },
            breaks, 1e-12)
            .value;
  }

  // The trapezoid interpolant of a smooth tabulation is slightly off unit
  // mass; Density's constructor renormalizes it.
  return Density(std::move(out));
}

// --- ClassModel --------------------------------------------------------------

ClassModel::ClassModel(std::vector<ClassEntry> entries) : entries_(std::move(entries)) {
  if (entries_.size() < 2)
    throw config_error("a class model needs at least two classes");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].label.empty()) throw config_error("class labels must be non-empty");
    for (std::size_t j = 0; j < i; ++j)
      if (entries_[i].label == entries_[j].label)
        throw config_error("duplicate class label '" + entries_[i].label + "'");
    if (entries_[i].density.dim() != entries_.front().density.dim())
      throw config_error("all class densities must share one dimension");
  }
}

Box ClassModel::support() const {
  Box b = entries_.front().density.support();
  for (std::size_t k = 1; k < entries_.size(); ++k)
    b = Box::unite(b, entries_[k].density.support());
  return b;
}

ClassModel ClassModel::convolved(const NoiseSpec& noise, std::size_t grid_knots) const {
  std::vector<ClassEntry> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_)
    out.push_back({e.label, e.density.convolved(noise, grid_knots)});
  return ClassModel(std::move(out));
}

} // namespace rhomax
