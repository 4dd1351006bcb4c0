#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rhomax/confusion.hpp"
#include "rhomax/density.hpp"
#include "rhomax/multiclass.hpp"
#include "rhomax/partition.hpp"
#include "rhomax/prevalence.hpp"

namespace rhomax::config {

// Additive Gaussian noise settings: one or more varsigma^2 magnitudes and an
// optional shape matrix (identity when omitted).
struct NoiseBlock {
  bool present = false;
  std::vector<double> grid;       // ascending varsigma^2 values, >= 1 entry
  Eigen::MatrixXd shape;          // 0x0 => isotropic identity
};

struct BoundsBlock {
  bool present = false;
  std::vector<double> q;          // empty => uniform prevalence
  std::size_t s = 100;
  bool assume_symmetric = false;
};

struct SimulateBlock {
  bool present = false;
  std::vector<double> q;          // empty => uniform prevalence
  SimulationOptions options;
};

struct WaterlevelBlock {
  bool present = false;
  double tol_delta = 1e-10;
  std::size_t sweep_n = 0;        // 0 => solve only, no level sweep
  double sweep_lo = 1e-3;
  double sweep_hi = 1e3;
  bool sweep_log = true;
};

struct BalanceBlock {
  bool present = false;
  std::vector<double> q_init;     // empty => uniform start
  BalanceOptions options;
  std::size_t check_trials = 0;   // random-prevalence optimality probes
  double check_tol = 1e-4;
};

struct CutsBlock {
  bool present = false;
  std::vector<double> init;       // empty => equally spaced over the support
  CutOptimOptions options;
};

// One fully parsed run description.  `classes` is the only required block;
// every tool command picks the blocks it needs and rejects a config that is
// missing them.
struct RunConfig {
  explicit RunConfig(ClassModel m) : model(std::move(m)) {}

  ClassModel model;
  std::optional<Partition> partition;
  IntegrationSettings integration;
  NoiseBlock noise;
  BoundsBlock bounds;
  SimulateBlock simulate;
  WaterlevelBlock waterlevel;
  BalanceBlock balance;
  CutsBlock cuts1d;
};

// JSON <-> objects.  Class indices are 1-based in JSON and 0-based in code.
Density parse_density(const nlohmann::json& j);
nlohmann::json dump_density(const Density& d);

Partition parse_partition(const nlohmann::json& j, std::size_t c);
nlohmann::json dump_partition(const Partition& p);

ClassModel parse_model(const nlohmann::json& j);

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json dump_config(const RunConfig& cfg);

} // namespace rhomax::config
