#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "rhomax/density.hpp"
#include "rhomax/partition.hpp"

namespace rhomax {

enum class ConfusionMethod { ClosedForm, Quadrature, MonteCarlo, Empirical };

// How the requested computation may be carried out.  Auto picks the most
// accurate route available: cdf differences / semi-analytic slices where the
// model allows them, adaptive quadrature next, Monte Carlo sampling last.
enum class MethodRequest { Auto, ClosedForm, Quadrature, MonteCarlo };

struct IntegrationSettings {
  MethodRequest method = MethodRequest::Auto;
  double quad_tol = 1e-10;        // absolute tolerance per matrix entry
  std::size_t mc_samples = 1'000'000;  // Monte Carlo draws per class
  std::uint64_t seed = 0;         // Monte Carlo stream seed
  std::size_t scan_grid = 4096;   // 1-d sign-scan resolution
  bool parallel = true;           // allow OpenMP in sampling kernels
};

// Column-stochastic confusion matrix: entries(j, k) is the probability that
// a class-k observation lands in cell j of the partition.
struct ConfusionMatrix {
  Eigen::MatrixXd entries;
  double column_tolerance = 0.0;  // bound on |column sum - 1|
  ConfusionMethod method = ConfusionMethod::ClosedForm;

  std::size_t size() const { return static_cast<std::size_t>(entries.cols()); }
};

// Wrap a raw matrix as a confusion matrix, clamping negative round-off and
// verifying every column sums to 1 within tol (property_violation if not).
ConfusionMatrix make_confusion(Eigen::MatrixXd entries, double tol,
                               ConfusionMethod method);

// Exact-measure confusion matrix of a partition under a class model.
ConfusionMatrix confusion_matrix(const ClassModel& model, const Partition& part,
                                 const IntegrationSettings& settings = {});

// Plug-in estimate from labelled per-class samples (row-major dim-strided
// points for each class).  column_tolerance is max_k 3 / (2 sqrt(m_k)).
ConfusionMatrix empirical_confusion(const ClassModel& model, const Partition& part,
                                    const std::vector<std::vector<double>>& class_points);

// Column off-diagonal mass analysis.
struct GershgorinReport {
  Eigen::VectorXd radii;              // rho_j = sum_{i != j} entries(i, j)
  double rho_max = 0.0;
  std::size_t argmax_column = 0;      // first column attaining rho_max
  bool diagonally_dominant = false;   // min_j entries(j, j) > 1/2
  double spectral_radius_i_minus_p = 0.0;
  double min_abs_eigenvalue = 0.0;    // of the matrix itself
  double inv_two_norm_sq = 0.0;       // ||P^{-1}||_2^2
};

GershgorinReport gershgorin(const ConfusionMatrix& p);

// Inverse with residual verification (||P X - I||_inf <= 1e-12 after at most
// one refinement step).  Refuses matrices without diagonal dominance unless
// force is set.
Eigen::MatrixXd invert(const ConfusionMatrix& p, bool force = false);

// --- 1-d region decomposition (shared with the water-level solver) ---------

struct LabelledInterval {
  double lo = 0.0, hi = 0.0;
  int label = 0;
};

// Decompose [lo, hi] into maximal intervals of constant label.  Labels are
// sampled at interval midpoints on a grid of at least grid_n points plus the
// forced breakpoints; boundaries between differing labels are then refined
// by bisection.  Features narrower than the grid step can be missed: pass
// every known discontinuity of the label function through `forced`.
std::vector<LabelledInterval> segment_by_label(
    const std::function<int(double)>& label, double lo, double hi,
    std::vector<double> forced, std::size_t grid_n = 4096);

// Known label-discontinuity abscissae of a density / partition, used to seed
// segment_by_label.
std::vector<double> density_breakpoints(const Density& d);
std::vector<double> partition_breakpoints(const Partition& part);

} // namespace rhomax
