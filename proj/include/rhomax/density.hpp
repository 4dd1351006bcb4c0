#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rhomax/errors.hpp"
#include "rhomax/rng.hpp"

namespace rhomax {

// Axis-aligned window in R^n.
struct Box {
  std::vector<double> lo, hi;
  std::size_t dim() const { return lo.size(); }
  static Box unite(const Box& a, const Box& b);
};

class Density;

struct Gaussian1D {
  double mean = 0.0;
  double sd = 1.0;
};

struct GaussianNd {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  // Derived quantities, filled when the Density is constructed.
  Eigen::MatrixXd chol;     // lower Cholesky factor of cov
  Eigen::MatrixXd cov_inv;  // cov^{-1}
  double log_norm = 0.0;    // log of the normalizing constant
};

struct Weibull {
  double shape = 1.0;
  double scale = 1.0;
};

struct UniformInterval {
  double lo = 0.0;
  double hi = 1.0;
};

struct UniformSegment {
  double lo = 0.0;
  double hi = 1.0;
  double height = 1.0;
};

// Disjoint constant-height segments; must integrate to 1.
struct PiecewiseUniform {
  std::vector<UniformSegment> segments;
};

// Exact Gaussian smoothing of a piecewise-constant density: each segment
// contributes height * (Phi((x-lo)/sigma) - Phi((x-hi)/sigma)).  Produced by
// Density::convolved; accepted on input as well.
struct SmoothedPiecewiseUniform {
  std::vector<UniformSegment> segments;
  double sigma = 1.0;
};

enum class GridInterp { Nearest, Multilinear };

// Tabulated density on a tensor grid (one or two axes).  Values are
// renormalized at construction so the interpolant integrates to exactly 1.
struct GridDensity {
  std::vector<std::vector<double>> axes;  // strictly increasing knots
  std::vector<double> values;             // row-major over the lattice
  GridInterp interp = GridInterp::Multilinear;
  // Derived: per-cell mass prefix sums (filled at Density construction).
  std::vector<double> cell_prefix;
};

// Sample-only density: evaluation is undefined, sampling resamples rows.
struct Empirical {
  std::size_t dim = 1;
  std::vector<double> points;  // row-major, count * dim entries
  std::size_t count() const { return dim == 0 ? 0 : points.size() / dim; }
};

struct Mixture {
  std::vector<double> weights;
  std::vector<Density> components;
};

// Additive Gaussian measurement noise N(0, varsigma^2 * shape) where the
// shape matrix is symmetric positive definite with largest eigenvalue 1, so
// varsigma^2 alone sets the noise magnitude.
class NoiseSpec {
public:
  NoiseSpec(double varsigma2, Eigen::MatrixXd shape);
  static NoiseSpec isotropic(std::size_t dim, double varsigma2);

  std::size_t dim() const { return static_cast<std::size_t>(shape_.rows()); }
  double varsigma2() const { return varsigma2_; }
  double scale() const;  // sqrt(varsigma2)
  const Eigen::MatrixXd& shape() const { return shape_; }
  Eigen::MatrixXd covariance() const { return varsigma2_ * shape_; }

private:
  double varsigma2_;
  Eigen::MatrixXd shape_;
};

class Density {
public:
  using Variant =
      std::variant<Gaussian1D, GaussianNd, Weibull, UniformInterval,
                   PiecewiseUniform, SmoothedPiecewiseUniform, Mixture,
                   GridDensity, Empirical>;

  explicit Density(Variant v);

  std::size_t dim() const { return dim_; }
  bool evaluable() const;
  bool has_cdf() const;

  // Pointwise evaluation; 0 outside the support.
  double operator()(std::span<const double> r) const;
  double operator()(double x) const;
  // log density, -inf where the density vanishes; computed in log space for
  // Gaussians so tail ratios never under/overflow.
  double log_eval(std::span<const double> r) const;
  double log_eval(double x) const;

  // Closed-form cdf (one-dimensional families only; see has_cdf).
  double cdf(double x) const;

  // Window carrying the support up to negligible tail mass (~1e-12 per
  // tail for unbounded families; exact bounds for bounded ones).
  Box support() const;

  // Numerical verification that the density integrates to 1.
  double mass(double tol = 1e-9) const;

  void sample_into(RandomStream& rs, std::span<double> out) const;
  std::vector<double> sample(std::uint64_t seed, std::size_t count) const;

  // Distribution of X + E, E ~ N(0, noise.covariance()) independent of X.
  // Closed form for Gaussian and (smoothed) piecewise-uniform inputs;
  // other one-dimensional families fall back to a tabulated grid with
  // grid_knots knots.  varsigma2 == 0 returns the density unchanged.
  Density convolved(const NoiseSpec& noise, std::size_t grid_knots = 2048) const;

  const Variant& raw() const { return v_; }
  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }

private:
  Variant v_;
  std::size_t dim_ = 1;
};

struct ClassEntry {
  std::string label;
  Density density;
};

// An ordered set of c >= 2 class-conditional densities on a common R^n.
class ClassModel {
public:
  explicit ClassModel(std::vector<ClassEntry> entries);

  std::size_t size() const { return entries_.size(); }
  std::size_t dim() const { return entries_.front().density.dim(); }
  const Density& density(std::size_t k) const { return entries_.at(k).density; }
  const std::string& label(std::size_t k) const { return entries_.at(k).label; }

  // Union of the per-class support windows.
  Box support() const;

  ClassModel convolved(const NoiseSpec& noise, std::size_t grid_knots = 2048) const;

private:
  std::vector<ClassEntry> entries_;
};

} // namespace rhomax
