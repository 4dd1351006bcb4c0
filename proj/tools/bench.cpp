// Timing harness for the OpenMP kernels against their serial reference
// implementations.  Each pair must produce bitwise-identical results; the
// benchmark reports both the speedup and that equality.
#include <chrono>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "rhomax/confusion.hpp"
#include "rhomax/density.hpp"
#include "rhomax/parallel.hpp"
#include "rhomax/partition.hpp"
#include "rhomax/prevalence.hpp"
#include "rhomax/waterlevel.hpp"

namespace {

using namespace rhomax;

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

bool same(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

bool same(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

void report(const char* name, double t_serial, double t_parallel, bool equal) {
  std::printf("%-22s %10.3fs %10.3fs   x%-6.2f %s\n", name, t_serial,
              t_parallel, t_serial / t_parallel,
              equal ? "bitwise-identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial-vs-parallel benchmark of the heavy kernels"};
  std::size_t replicates = 40'000;
  std::size_t levels = 400;
  std::size_t mc = 4'000'000;
  int threads = 0;
  app.add_option("--replicates", replicates, "simulation replicates");
  app.add_option("--levels", levels, "level-curve grid size");
  app.add_option("--mc", mc, "Monte Carlo draws per class");
  app.add_option("--threads", threads, "worker threads (0 = default)");
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) parallel::set_threads(threads);
  std::cout << "threads: " << parallel::max_threads() << "\n\n";

  const ClassModel model3({{"low", Density(Gaussian1D{-2.0, 1.0})},
                           {"mid", Density(Gaussian1D{0.0, 1.0})},
                           {"high", Density(Gaussian1D{2.0, 1.0})}});
  const Partition cuts{Partition::Variant{CutPoints1D{{-1.0, 1.0}, {}}}};
  const ConfusionMatrix p = confusion_matrix(model3, cuts);
  const Prevalence q({0.2, 0.5, 0.3});

  {
    SimulationOptions opts;
    opts.replicates = replicates;
    opts.seed = 7;
    SimulationResult a, b;
    const double ts = seconds([&] {
      opts.parallel = false;
      a = simulate_serial(model3, cuts, p, q, opts);
    });
    const double tp = seconds([&] {
      opts.parallel = true;
      b = simulate(model3, cuts, p, q, opts);
    });
    const bool eq = a.sigma2 == b.sigma2 && a.sigma2_se == b.sigma2_se &&
                    same(a.mean_q_hat, b.mean_q_hat) && same(a.bias, b.bias);
    report("simulate", ts, tp, eq);
  }

  {
    const ClassModel pair({{"signal", Density(Gaussian1D{1.5, 1.0})},
                           {"background", Density(Gaussian1D{0.0, 1.0})}});
    std::vector<double> grid(levels);
    for (std::size_t i = 0; i < levels; ++i)
      grid[i] = 1e-2 * std::pow(1e4, static_cast<double>(i) /
                                          static_cast<double>(levels - 1));
    std::vector<LevelCurvePoint> a, b;
    const double ts = seconds([&] { a = sweep_levels_serial(pair, grid); });
    const double tp = seconds([&] { b = sweep_levels(pair, grid); });
    bool eq = a.size() == b.size();
    for (std::size_t i = 0; eq && i < a.size(); ++i)
      eq = a[i].t == b[i].t && a[i].mu1 == b[i].mu1 && a[i].mu2 == b[i].mu2 &&
           a[i].delta == b[i].delta && a[i].rho_max == b[i].rho_max;
    report("level-curve sweep", ts, tp, eq);
  }

  {
    IntegrationSettings s;
    s.method = MethodRequest::MonteCarlo;
    s.mc_samples = mc;
    s.seed = 11;
    ConfusionMatrix a, b;
    const double ts = seconds([&] {
      s.parallel = false;
      a = confusion_matrix(model3, cuts, s);
    });
    const double tp = seconds([&] {
      s.parallel = true;
      b = confusion_matrix(model3, cuts, s);
    });
    report("monte-carlo confusion", ts, tp, same(a.entries, b.entries));
  }

  return 0;
}
