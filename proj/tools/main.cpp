// Command-line front end: every subcommand reads a JSON run description,
// prints a human-readable summary, and optionally writes the result as
// .json or .csv (chosen by the --out extension).
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rhomax/bounds.hpp"
#include "rhomax/config.hpp"
#include "rhomax/csv.hpp"
#include "rhomax/errors.hpp"
#include "rhomax/multiclass.hpp"
#include "rhomax/noise.hpp"
#include "rhomax/parallel.hpp"
#include "rhomax/prevalence.hpp"
#include "rhomax/waterlevel.hpp"

namespace {

using nlohmann::json;
using namespace rhomax;

struct Common {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "JSON run description")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", c.out_path,
                  "write the result to this .json or .csv file");
  cmd->add_option("--seed", c.seed, "override every random seed in the config")
      ->each([&c](const std::string&) { c.seed_set = true; });
  cmd->add_option("--threads", c.threads,
                  "worker thread count (0 = library default)");
}

config::RunConfig load(const Common& c) {
  config::RunConfig cfg = config::load_config(c.config_path);
  if (c.threads > 0) parallel::set_threads(c.threads);
  if (c.seed_set) {
    cfg.integration.seed = c.seed;
    cfg.simulate.options.seed = c.seed;
  }
  return cfg;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void emit(const Common& c, const json& doc, const csv::Table& table) {
  if (c.out_path.empty()) return;
  if (ends_with(c.out_path, ".json")) {
    std::ofstream os(c.out_path);
    if (!os) throw config_error("cannot write to '" + c.out_path + "'");
    os << doc.dump(2) << '\n';
  } else if (ends_with(c.out_path, ".csv")) {
    table.save(c.out_path);
  } else {
    throw config_error("--out must end in .json or .csv");
  }
  std::cout << "wrote " << c.out_path << "\n";
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

const char* method_name(ConfusionMethod m) {
  switch (m) {
    case ConfusionMethod::ClosedForm: return "closed-form";
    case ConfusionMethod::Quadrature: return "quadrature";
    case ConfusionMethod::MonteCarlo: return "monte-carlo";
    case ConfusionMethod::Empirical: return "empirical";
  }
  return "?";
}

void print_matrix(const std::string& name, const Eigen::MatrixXd& m) {
  const Eigen::IOFormat fmt(10, 0, "  ", "\n", "  ", "");
  std::cout << name << ":\n" << m.format(fmt) << "\n";
}

Prevalence prevalence_or_uniform(const std::vector<double>& q, std::size_t c) {
  return q.empty() ? Prevalence::uniform(c) : Prevalence(q);
}

const Partition& require_partition(const config::RunConfig& cfg) {
  if (!cfg.partition)
    throw config_error("this command needs a 'partition' block in the config");
  return *cfg.partition;
}

// Shared by `confusion` and `bounds`.
std::pair<json, ConfusionMatrix> confusion_core(const config::RunConfig& cfg,
                                                csv::Table& table) {
  const Partition& part = require_partition(cfg);
  const ConfusionMatrix p = confusion_matrix(cfg.model, part, cfg.integration);
  const GershgorinReport g = gershgorin(p);

  print_matrix("confusion matrix P (columns = true class)", p.entries);
  std::cout << "method: " << method_name(p.method)
            << "   column tolerance: " << p.column_tolerance << "\n";
  std::cout << std::setprecision(10);
  std::cout << "column radii rho_j:";
  for (Eigen::Index i = 0; i < g.radii.size(); ++i)
    std::cout << " " << g.radii(i);
  std::cout << "\nrho_max = " << g.rho_max << "  (column "
            << g.argmax_column + 1 << ")\n";
  std::cout << "diagonally dominant (all P_kk > 1/2): "
            << (g.diagonally_dominant ? "yes" : "no") << "\n";
  std::cout << "spectral radius of I - P: " << g.spectral_radius_i_minus_p
            << "  (bound 2 rho_max = " << 2.0 * g.rho_max << ")\n";
  std::cout << "min |eigenvalue| of P: " << g.min_abs_eigenvalue
            << "  (bound 1 - 2 rho_max = " << 1.0 - 2.0 * g.rho_max << ")\n";
  std::cout << "||P^-1||_2^2: " << g.inv_two_norm_sq << "\n";

  json doc;
  doc["p"] = mat_json(p.entries);
  doc["method"] = method_name(p.method);
  doc["column_tolerance"] = p.column_tolerance;
  doc["radii"] = vec_json(g.radii);
  doc["rho_max"] = g.rho_max;
  doc["argmax_column"] = g.argmax_column + 1;
  doc["diagonally_dominant"] = g.diagonally_dominant;
  doc["spectral_radius_i_minus_p"] = g.spectral_radius_i_minus_p;
  doc["min_abs_eigenvalue"] = g.min_abs_eigenvalue;
  doc["inv_two_norm_sq"] = g.inv_two_norm_sq;
  if (g.diagonally_dominant) {
    const Eigen::MatrixXd inv = invert(p);
    print_matrix("P^-1", inv);
    doc["p_inverse"] = mat_json(inv);
  }

  const std::size_t c = p.size();
  table.header = {"row"};
  for (std::size_t k = 0; k < c; ++k)
    table.header.push_back(cfg.model.label(k));
  for (std::size_t i = 0; i < c; ++i) {
    std::vector<std::string> row{"cell " + std::to_string(i + 1)};
    for (std::size_t k = 0; k < c; ++k)
      row.push_back(csv::value(p.entries(static_cast<Eigen::Index>(i),
                                         static_cast<Eigen::Index>(k))));
    table.add(std::move(row));
  }
  std::vector<std::string> radii_row{"radius"};
  for (Eigen::Index i = 0; i < g.radii.size(); ++i)
    radii_row.push_back(csv::value(g.radii(i)));
  table.add(std::move(radii_row));

  return {std::move(doc), p};
}

int cmd_validate(const Common& c) {
  const config::RunConfig cfg = load(c);
  csv::Table table;
  table.header = {"class", "label", "dim", "mass"};
  json classes = json::array();
  for (std::size_t k = 0; k < cfg.model.size(); ++k) {
    const Density& d = cfg.model.density(k);
    json e;
    e["label"] = cfg.model.label(k);
    e["dim"] = d.dim();
    std::string mass_text = "sample-only";
    if (d.evaluable()) {
      const double m = d.mass();
      e["mass"] = m;
      mass_text = csv::value(m);
    }
    std::cout << "class " << k + 1 << " '" << cfg.model.label(k)
              << "': dim " << d.dim() << ", mass " << mass_text << "\n";
    table.add({csv::value(k + 1), cfg.model.label(k), csv::value(d.dim()),
               mass_text});
    classes.push_back(std::move(e));
  }
  if (cfg.partition) {
    cfg.partition->validate_for(cfg.model);
    std::cout << "partition: valid, " << cfg.partition->cells() << " cells\n";
  }
  std::cout << "config OK\n";
  json doc;
  doc["classes"] = std::move(classes);
  doc["valid"] = true;
  emit(c, doc, table);
  return 0;
}

int cmd_confusion(const Common& c) {
  const config::RunConfig cfg = load(c);
  csv::Table table;
  const json doc = confusion_core(cfg, table).first;
  emit(c, doc, table);
  return 0;
}

int cmd_bounds(const Common& c) {
  const config::RunConfig cfg = load(c);
  csv::Table ignored;
  auto [doc, p] = confusion_core(cfg, ignored);

  const Prevalence q = prevalence_or_uniform(cfg.bounds.q, cfg.model.size());
  const BoundReport b =
      variance_bounds(p, q, cfg.bounds.s, cfg.bounds.assume_symmetric);
  const double err = classification_error(p, q);

  std::cout << "\nprevalence q:";
  for (double v : q.values()) std::cout << " " << v;
  std::cout << "\nsample size s: " << b.s << "\n";
  std::cout << "classification error at q: " << err
            << "   uniform bound rho_max: " << b.error_bound << "\n";
  std::cout << "excess variance bound eps_rho: " << b.eps_rho << "\n";
  std::cout << "multinomial term sum q(1-q)/s: " << b.multinomial << "\n";
  std::cout << "total variance bound eps_sigma: " << b.eps_sigma << "\n";
  std::cout << "symmetric-tier bounds (/c): eps_rho " << b.eps_rho_tight
            << ", eps_sigma " << b.eps_sigma_tight
            << (b.tight_certified ? "  [certified]" : "  [not certified]")
            << "\n";

  doc["q"] = std::vector<double>(q.values().begin(), q.values().end());
  doc["s"] = b.s;
  doc["classification_error"] = err;
  doc["error_bound"] = b.error_bound;
  doc["eps_rho"] = b.eps_rho;
  doc["eps_rho_tight"] = b.eps_rho_tight;
  doc["multinomial"] = b.multinomial;
  doc["eps_sigma"] = b.eps_sigma;
  doc["eps_sigma_tight"] = b.eps_sigma_tight;
  doc["tight_certified"] = b.tight_certified;

  csv::Table table;
  table.header = {"quantity", "value"};
  table.add({"rho_max", csv::value(b.rho_max)});
  table.add({"classification_error", csv::value(err)});
  table.add({"eps_rho", csv::value(b.eps_rho)});
  table.add({"eps_rho_tight", csv::value(b.eps_rho_tight)});
  table.add({"multinomial", csv::value(b.multinomial)});
  table.add({"eps_sigma", csv::value(b.eps_sigma)});
  table.add({"eps_sigma_tight", csv::value(b.eps_sigma_tight)});
  emit(c, doc, table);
  return 0;
}

json waterlevel_json(const WaterLevelResult& w) {
  json doc;
  doc["t_star"] = w.t_star;
  doc["rho_star"] = w.rho_star;
  doc["mu1_star"] = w.mu1_star;
  doc["mu2_star"] = w.mu2_star;
  doc["boundary_mass1"] = w.boundary_mass1;
  doc["boundary_mass2"] = w.boundary_mass2;
  doc["atom_case"] = w.atom_case;
  doc["partition"] = config::dump_partition(w.partition);
  return doc;
}

int cmd_waterlevel(const Common& c) {
  const config::RunConfig cfg = load(c);
  const WaterLevelResult w =
      solve_water_level(cfg.model, cfg.waterlevel.tol_delta, cfg.integration);

  std::cout << std::setprecision(10);
  std::cout << "t* = " << w.t_star << "\n";
  std::cout << "rho* = " << w.rho_star << "\n";
  std::cout << "balanced diagonals: mu1 = " << w.mu1_star
            << ", mu2 = " << w.mu2_star << "\n";
  if (w.atom_case)
    std::cout << "tie set carries mass (split explicitly): under p1 "
              << w.boundary_mass1 << ", under p2 " << w.boundary_mass2 << "\n";
  std::cout << "partition: " << config::dump_partition(w.partition).dump()
            << "\n";

  json doc = waterlevel_json(w);
  csv::Table table;
  table.header = {"quantity", "value"};
  table.add({"t_star", csv::value(w.t_star)});
  table.add({"rho_star", csv::value(w.rho_star)});
  table.add({"mu1_star", csv::value(w.mu1_star)});
  table.add({"mu2_star", csv::value(w.mu2_star)});

  if (cfg.waterlevel.sweep_n > 1) {
    std::vector<double> levels(cfg.waterlevel.sweep_n);
    const double lo = cfg.waterlevel.sweep_lo, hi = cfg.waterlevel.sweep_hi;
    const std::size_t n = cfg.waterlevel.sweep_n;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = static_cast<double>(i) / static_cast<double>(n - 1);
      levels[i] = cfg.waterlevel.sweep_log
                      ? lo * std::pow(hi / lo, f)
                      : lo + f * (hi - lo);
    }
    const auto curve = sweep_levels(cfg.model, levels, cfg.integration);
    json sweep = json::array();
    csv::Table sweep_table;
    sweep_table.header = {"t", "mu1", "mu2", "delta", "tie_mass1", "tie_mass2",
                          "rho_max"};
    for (const auto& pt : curve) {
      sweep.push_back({{"t", pt.t},
                       {"mu1", pt.mu1},
                       {"mu2", pt.mu2},
                       {"delta", pt.delta},
                       {"tie_mass1", pt.boundary_mass1},
                       {"tie_mass2", pt.boundary_mass2},
                       {"rho_max", pt.rho_max}});
      sweep_table.add({csv::value(pt.t), csv::value(pt.mu1), csv::value(pt.mu2),
                       csv::value(pt.delta), csv::value(pt.boundary_mass1),
                       csv::value(pt.boundary_mass2), csv::value(pt.rho_max)});
    }
    doc["sweep"] = std::move(sweep);
    table = std::move(sweep_table);  // the sweep is the natural CSV payload
    std::cout << "swept " << curve.size() << " levels in ["
              << cfg.waterlevel.sweep_lo << ", " << cfg.waterlevel.sweep_hi
              << "]\n";
  }

  emit(c, doc, table);
  return 0;
}

int cmd_simulate(const Common& c) {
  const config::RunConfig cfg = load(c);
  const Partition& part = require_partition(cfg);
  const ConfusionMatrix p = confusion_matrix(cfg.model, part, cfg.integration);
  const Prevalence q = prevalence_or_uniform(cfg.simulate.q, cfg.model.size());
  const SimulationResult sim =
      simulate(cfg.model, part, p, q, cfg.simulate.options);

  std::cout << std::setprecision(10);
  std::cout << "replicates: " << sim.replicates << "   s: " << sim.s
            << "   seed: " << sim.seed << "\n";
  std::cout << "q_true:    ";
  for (Eigen::Index i = 0; i < sim.q_true.size(); ++i)
    std::cout << " " << sim.q_true(i);
  std::cout << "\nmean q_hat:";
  for (Eigen::Index i = 0; i < sim.mean_q_hat.size(); ++i)
    std::cout << " " << sim.mean_q_hat(i);
  std::cout << "\nbias (+-se):";
  for (Eigen::Index i = 0; i < sim.bias.size(); ++i)
    std::cout << " " << sim.bias(i) << " (" << sim.bias_se(i) << ")";
  std::cout << "\nsigma2 = E||q_hat - q||^2: " << sim.sigma2 << " (se "
            << sim.sigma2_se << ")\n";
  if (sim.sigma2_weighted)
    std::cout << "weighted sigma2: " << *sim.sigma2_weighted << " (se "
              << *sim.sigma2_weighted_se << ")\n";

  json doc;
  doc["replicates"] = sim.replicates;
  doc["s"] = sim.s;
  doc["seed"] = sim.seed;
  doc["q_true"] = vec_json(sim.q_true);
  doc["mean_q_hat"] = vec_json(sim.mean_q_hat);
  doc["bias"] = vec_json(sim.bias);
  doc["bias_se"] = vec_json(sim.bias_se);
  doc["sigma2"] = sim.sigma2;
  doc["sigma2_se"] = sim.sigma2_se;
  if (sim.sigma2_weighted) {
    doc["sigma2_weighted"] = *sim.sigma2_weighted;
    doc["sigma2_weighted_se"] = *sim.sigma2_weighted_se;
  }

  csv::Table table;
  table.header = {"quantity", "value"};
  table.add({"sigma2", csv::value(sim.sigma2)});
  table.add({"sigma2_se", csv::value(sim.sigma2_se)});

  {
    // Compare against the uniform bounds at the simulated prevalence.
    const BoundReport b = variance_bounds(p, q, cfg.simulate.options.s,
                                          cfg.bounds.assume_symmetric);
    const BoundCheckResult chk = bound_check(sim, b);
    std::cout << "bound eps_sigma: " << chk.eps_sigma << "   margin (+3se): "
              << chk.margin << (chk.pass ? "  PASS" : "  FAIL") << "\n";
    std::cout << "tight tier eps_sigma/c: " << chk.eps_sigma_tight
              << "   margin: " << chk.margin_tight
              << (chk.pass_tight ? "  PASS" : "  FAIL")
              << (b.tight_certified ? "  [certified]" : "  [not certified]")
              << "\n";
    if (chk.low_power)
      std::cout << "warning: too few replicates for a meaningful check\n";
    doc["eps_sigma"] = chk.eps_sigma;
    doc["eps_sigma_tight"] = chk.eps_sigma_tight;
    doc["margin"] = chk.margin;
    doc["margin_tight"] = chk.margin_tight;
    doc["pass"] = chk.pass;
    doc["pass_tight"] = chk.pass_tight;
    table.add({"eps_sigma", csv::value(chk.eps_sigma)});
    table.add({"margin", csv::value(chk.margin)});
    table.add({"pass", chk.pass ? "1" : "0"});
  }

  emit(c, doc, table);
  return 0;
}

int cmd_noise_sweep(const Common& c) {
  const config::RunConfig cfg = load(c);
  if (!cfg.noise.present)
    throw config_error("noise-sweep needs a 'noise' block in the config");
  Eigen::MatrixXd shape = cfg.noise.shape;
  if (shape.size() == 0) {
    const auto d = static_cast<Eigen::Index>(cfg.model.dim());
    shape = Eigen::MatrixXd::Identity(d, d);
  }
  const Partition* fixed = cfg.partition ? &*cfg.partition : nullptr;
  const NoiseSweepResult res =
      rho_star_vs_noise(cfg.model, shape, cfg.noise.grid, fixed,
                        cfg.integration, cfg.waterlevel.tol_delta);

  std::cout << std::setprecision(10);
  json points = json::array();
  csv::Table table;
  table.header = {"varsigma2", "t_star", "rho_star"};
  if (fixed) table.header.push_back("rho_fixed");
  for (const auto& pt : res.points) {
    std::cout << "varsigma2 " << pt.varsigma2 << ": t* " << pt.t_star
              << ", rho* " << pt.rho_star;
    if (pt.rho_fixed) std::cout << ", fixed-partition rho " << *pt.rho_fixed;
    std::cout << "\n";
    json p = {{"varsigma2", pt.varsigma2},
              {"t_star", pt.t_star},
              {"rho_star", pt.rho_star}};
    std::vector<std::string> row{csv::value(pt.varsigma2),
                                 csv::value(pt.t_star),
                                 csv::value(pt.rho_star)};
    if (pt.rho_fixed) {
      p["rho_fixed"] = *pt.rho_fixed;
      row.push_back(csv::value(*pt.rho_fixed));
    }
    points.push_back(std::move(p));
    table.add(std::move(row));
  }
  std::cout << "rho* non-decreasing in noise: "
            << (res.rho_star_monotone ? "yes" : "NO") << "\n";

  json doc;
  doc["points"] = std::move(points);
  doc["rho_star_monotone"] = res.rho_star_monotone;
  emit(c, doc, table);
  return 0;
}

int cmd_balance(const Common& c) {
  const config::RunConfig cfg = load(c);
  const Prevalence q0 =
      prevalence_or_uniform(cfg.balance.q_init, cfg.model.size());
  const BalanceResult res =
      balance_prevalence(cfg.model, q0, cfg.balance.options, cfg.integration);

  std::cout << std::setprecision(10);
  std::cout << "converged: " << (res.converged ? "yes" : "NO")
            << "   iterations: " << res.iterations
            << (res.used_fallback ? " (direct-search polish used)" : "")
            << "\n";
  std::cout << "residual max|P_kk - mean|: " << res.residual << "\n";
  std::cout << "rho* = " << res.rho_star << "\n";
  std::cout << "q*:";
  for (double v : res.q_star.values()) std::cout << " " << v;
  std::cout << "\n";
  print_matrix("balanced confusion matrix", res.p_star.entries);

  json doc;
  doc["converged"] = res.converged;
  doc["used_fallback"] = res.used_fallback;
  doc["iterations"] = res.iterations;
  doc["residual"] = res.residual;
  doc["rho_star"] = res.rho_star;
  doc["q_star"] =
      std::vector<double>(res.q_star.values().begin(), res.q_star.values().end());
  doc["p_star"] = mat_json(res.p_star.entries);

  csv::Table table;
  table.header = {"class", "q_star", "diagonal"};
  for (std::size_t k = 0; k < cfg.model.size(); ++k)
    table.add({cfg.model.label(k), csv::value(res.q_star[k]),
               csv::value(res.p_star.entries(static_cast<Eigen::Index>(k),
                                             static_cast<Eigen::Index>(k)))});

  if (cfg.balance.check_trials > 0) {
    const OptimalityCheck chk = verify_balance_optimality(
        cfg.model, res.rho_star, cfg.balance.check_trials,
        cfg.integration.seed, cfg.balance.check_tol, cfg.integration);
    std::cout << "optimality probes: " << chk.trials << " random prevalences, "
              << chk.failures << " below rho* (worst margin "
              << chk.worst_margin << ") -> " << (chk.pass ? "PASS" : "FAIL")
              << "\n";
    doc["check"] = {{"trials", chk.trials},
                    {"failures", chk.failures},
                    {"worst_margin", chk.worst_margin},
                    {"pass", chk.pass}};
  }

  emit(c, doc, table);
  return 0;
}

int cmd_cuts1d(const Common& c) {
  const config::RunConfig cfg = load(c);
  std::vector<double> init = cfg.cuts1d.init;
  if (init.empty()) {
    // Equally spaced interior cuts over the model's support window.
    const Box w = cfg.model.support();
    const std::size_t n = cfg.model.size() - 1;
    for (std::size_t i = 1; i <= n; ++i)
      init.push_back(w.lo[0] + (w.hi[0] - w.lo[0]) * static_cast<double>(i) /
                                   static_cast<double>(n + 1));
  }
  const CutOptimResult res =
      optimize_cutpoints_1d(cfg.model, init, cfg.cuts1d.options, cfg.integration);

  std::cout << std::setprecision(10);
  std::cout << "cuts:";
  for (double x : res.cuts) std::cout << " " << x;
  std::cout << "\nrho_max = " << res.rho_max << "   trace = " << res.trace
            << "\n";
  std::cout << "objective evaluations: " << res.evaluations
            << "   converged: " << (res.converged ? "yes" : "NO") << "\n";
  print_matrix("confusion matrix at the optimum", res.p.entries);

  json doc;
  doc["cuts"] = res.cuts;
  doc["rho_max"] = res.rho_max;
  doc["trace"] = res.trace;
  doc["evaluations"] = res.evaluations;
  doc["converged"] = res.converged;
  doc["p"] = mat_json(res.p.entries);

  csv::Table table;
  table.header = {"cut", "value"};
  for (std::size_t i = 0; i < res.cuts.size(); ++i)
    table.add({csv::value(i + 1), csv::value(res.cuts[i])});
  emit(c, doc, table);
  return 0;
}

int cmd_dump_config(const Common& c) {
  const config::RunConfig cfg = load(c);
  const json doc = config::dump_config(cfg);
  std::cout << doc.dump(2) << "\n";
  csv::Table empty;
  emit(c, doc, empty);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "uniform error and variance bounds for prevalence estimation through "
      "a classifier's confusion matrix"};
  app.require_subcommand(1);

  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const Common&);
  };
  const Cmd cmds[] = {
      {"validate", "parse the config and check every density and partition",
       cmd_validate},
      {"confusion", "confusion matrix, column radii, and inverse", cmd_confusion},
      {"bounds", "classification-error and variance bounds at a prevalence",
       cmd_bounds},
      {"waterlevel", "two-class minimax partition via the level curve",
       cmd_waterlevel},
      {"simulate", "Monte Carlo check of the variance bounds", cmd_simulate},
      {"noise-sweep", "re-optimized rho* under growing measurement noise",
       cmd_noise_sweep},
      {"balance", "prevalence with equal confusion-matrix diagonals", cmd_balance},
      {"cuts1d", "coordinate descent on one-dimensional cut points", cmd_cuts1d},
      {"dump-config", "echo the parsed config in normalized form",
       cmd_dump_config},
  };

  std::vector<Common> commons(std::size(cmds));
  int (*selected)(const Common&) = nullptr;
  const Common* selected_common = nullptr;
  for (std::size_t i = 0; i < std::size(cmds); ++i) {
    CLI::App* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    add_common(sub, commons[i]);
    sub->callback([&, i] {
      selected = cmds[i].run;
      selected_common = &commons[i];
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 4;
  }

  try {
    return selected(*selected_common);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  } catch (const non_convergence& e) {
    std::cerr << "did not converge: " << e.what() << "\n";
    return 3;
  } catch (const property_violation& e) {
    std::cerr << "property violated: " << e.what() << "\n";
    return 2;
  } catch (const unsupported_operation& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
