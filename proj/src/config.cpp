#include "rhomax/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace rhomax::config {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw config_error(what); }

const json& require(const json& j, const char* key, const char* where) {
  const auto it = j.find(key);
  if (it == j.end())
    fail(std::string(where) + " is missing required key '" + key + "'");
  return *it;
}

double number(const json& j, const char* where) {
  if (!j.is_number())
    fail(std::string(where) + " must be a number");
  return j.get<double>();
}

std::vector<double> number_list(const json& j, const char* where) {
  if (!j.is_array())
    fail(std::string(where) + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(number(v, where));
  return out;
}

Eigen::MatrixXd matrix(const json& j, const char* where) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    fail(std::string(where) + " must be an array of equal-length rows");
  const std::size_t rows = j.size(), cols = j.front().size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      fail(std::string(where) + " rows must all have the same length");
    for (std::size_t k = 0; k < cols; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          number(j[i][k], where);
  }
  return m;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<UniformSegment> segments(const json& j, const char* where) {
  if (!j.is_array() || j.empty())
    fail(std::string(where) + ".segments must be a non-empty array");
  std::vector<UniformSegment> out;
  for (const auto& seg : j) {
    if (!seg.is_array() || seg.size() != 3)
      fail(std::string(where) + ".segments entries must be [lo, hi, height]");
    out.push_back({number(seg[0], where), number(seg[1], where),
                   number(seg[2], where)});
  }
  return out;
}

json segments_json(const std::vector<UniformSegment>& segs) {
  json out = json::array();
  for (const auto& s : segs) out.push_back(json::array({s.lo, s.hi, s.height}));
  return out;
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const char* where) {
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      fail(std::string(where) + " has unknown key '" + item.key() + "'");
}

// 1-based class index in JSON -> 0-based.
std::size_t class_index(const json& j, std::size_t c, const char* where) {
  if (!j.is_number_integer())
    fail(std::string(where) + " must be a 1-based class index");
  const long long v = j.get<long long>();
  if (v < 1 || (c != 0 && v > static_cast<long long>(c)))
    fail(std::string(where) + " must be between 1 and the class count");
  return static_cast<std::size_t>(v - 1);
}

} // namespace

Density parse_density(const json& j) {
  if (!j.is_object()) fail("a density must be a JSON object");
  const std::string kind = require(j, "kind", "density").get<std::string>();

  if (kind == "gaussian") {
    reject_unknown_keys(j, {"kind", "mean", "sd"}, "gaussian");
    return Density(Gaussian1D{number(require(j, "mean", "gaussian"), "mean"),
                              number(require(j, "sd", "gaussian"), "sd")});
  }
  if (kind == "gaussian-nd") {
    reject_unknown_keys(j, {"kind", "mean", "cov"}, "gaussian-nd");
    const auto mean = number_list(require(j, "mean", "gaussian-nd"), "mean");
    GaussianNd g;
    g.mean = Eigen::Map<const Eigen::VectorXd>(
        mean.data(), static_cast<Eigen::Index>(mean.size()));
    g.cov = matrix(require(j, "cov", "gaussian-nd"), "cov");
    return Density(std::move(g));
  }
  if (kind == "weibull") {
    reject_unknown_keys(j, {"kind", "shape", "scale"}, "weibull");
    return Density(Weibull{number(require(j, "shape", "weibull"), "shape"),
                           number(require(j, "scale", "weibull"), "scale")});
  }
  if (kind == "uniform") {
    reject_unknown_keys(j, {"kind", "lo", "hi"}, "uniform");
    return Density(UniformInterval{number(require(j, "lo", "uniform"), "lo"),
                                   number(require(j, "hi", "uniform"), "hi")});
  }
  if (kind == "piecewise-uniform") {
    reject_unknown_keys(j, {"kind", "segments"}, "piecewise-uniform");
    return Density(PiecewiseUniform{
        segments(require(j, "segments", "piecewise-uniform"), "piecewise-uniform")});
  }
  if (kind == "smoothed-piecewise-uniform") {
    reject_unknown_keys(j, {"kind", "segments", "sigma"},
                        "smoothed-piecewise-uniform");
    return Density(SmoothedPiecewiseUniform{
        segments(require(j, "segments", "smoothed-piecewise-uniform"),
                 "smoothed-piecewise-uniform"),
        number(require(j, "sigma", "smoothed-piecewise-uniform"), "sigma")});
  }
  if (kind == "mixture") {
    reject_unknown_keys(j, {"kind", "weights", "components"}, "mixture");
    Mixture m;
    m.weights = number_list(require(j, "weights", "mixture"), "weights");
    const auto& comps = require(j, "components", "mixture");
    if (!comps.is_array()) fail("mixture.components must be an array");
    for (const auto& comp : comps) m.components.push_back(parse_density(comp));
    return Density(std::move(m));
  }
  if (kind == "grid") {
    reject_unknown_keys(j, {"kind", "axes", "values", "interp"}, "grid");
    GridDensity g;
    const auto& axes = require(j, "axes", "grid");
    if (!axes.is_array() || axes.empty())
      fail("grid.axes must be an array of knot arrays");
    for (const auto& axis : axes) g.axes.push_back(number_list(axis, "axes"));
    g.values = number_list(require(j, "values", "grid"), "values");
    if (j.contains("interp")) {
      const std::string s = j["interp"].get<std::string>();
      if (s == "multilinear")
        g.interp = GridInterp::Multilinear;
      else if (s == "nearest")
        g.interp = GridInterp::Nearest;
      else
        fail("grid.interp must be 'multilinear' or 'nearest'");
    }
    return Density(std::move(g));
  }
  if (kind == "empirical") {
    reject_unknown_keys(j, {"kind", "points"}, "empirical");
    const auto& pts = require(j, "points", "empirical");
    if (!pts.is_array() || pts.empty())
      fail("empirical.points must be a non-empty array");
    Empirical e;
    if (pts.front().is_array()) {
      e.dim = pts.front().size();
      for (const auto& row : pts) {
        if (!row.is_array() || row.size() != e.dim)
          fail("empirical.points rows must all have the same length");
        for (const auto& v : row) e.points.push_back(number(v, "points"));
      }
    } else {
      e.dim = 1;
      e.points = number_list(pts, "points");
    }
    return Density(std::move(e));
  }
  fail("unknown density kind '" + kind + "'");
}

json dump_density(const Density& d) {
  struct Visitor {
    json operator()(const Gaussian1D& g) const {
      return {{"kind", "gaussian"}, {"mean", g.mean}, {"sd", g.sd}};
    }
    json operator()(const GaussianNd& g) const {
      json mean = json::array();
      for (Eigen::Index i = 0; i < g.mean.size(); ++i) mean.push_back(g.mean(i));
      return {{"kind", "gaussian-nd"}, {"mean", std::move(mean)},
              {"cov", matrix_json(g.cov)}};
    }
    json operator()(const Weibull& w) const {
      return {{"kind", "weibull"}, {"shape", w.shape}, {"scale", w.scale}};
    }
    json operator()(const UniformInterval& u) const {
      return {{"kind", "uniform"}, {"lo", u.lo}, {"hi", u.hi}};
    }
    json operator()(const PiecewiseUniform& p) const {
      return {{"kind", "piecewise-uniform"}, {"segments", segments_json(p.segments)}};
    }
    json operator()(const SmoothedPiecewiseUniform& p) const {
      return {{"kind", "smoothed-piecewise-uniform"},
              {"segments", segments_json(p.segments)},
              {"sigma", p.sigma}};
    }
    json operator()(const Mixture& m) const {
      json comps = json::array();
      for (const auto& c : m.components) comps.push_back(dump_density(c));
      return {{"kind", "mixture"}, {"weights", m.weights},
              {"components", std::move(comps)}};
    }
    json operator()(const GridDensity& g) const {
      return {{"kind", "grid"},
              {"axes", g.axes},
              {"values", g.values},
              {"interp", g.interp == GridInterp::Nearest ? "nearest"
                                                         : "multilinear"}};
    }
    json operator()(const Empirical& e) const {
      json pts = json::array();
      for (std::size_t r = 0; r < e.count(); ++r) {
        json row = json::array();
        for (std::size_t i = 0; i < e.dim; ++i)
          row.push_back(e.points[r * e.dim + i]);
        pts.push_back(std::move(row));
      }
      return {{"kind", "empirical"}, {"points", std::move(pts)}};
    }
  };
  return std::visit(Visitor{}, d.raw());
}

Partition parse_partition(const json& j, std::size_t c) {
  if (!j.is_object()) fail("partition must be a JSON object");
  const std::string kind = require(j, "kind", "partition").get<std::string>();

  if (kind == "ratio-threshold") {
    reject_unknown_keys(j, {"kind", "t", "boundary_to"}, "ratio-threshold");
    RatioThreshold r;
    r.t = number(require(j, "t", "ratio-threshold"), "t");
    if (j.contains("boundary_to"))
      r.boundary_to = class_index(j["boundary_to"], 2, "boundary_to");
    return Partition(Partition::Variant{r});
  }
  if (kind == "cutpoints") {
    reject_unknown_keys(j, {"kind", "cuts", "order"}, "cutpoints");
    CutPoints1D cp;
    cp.cuts = number_list(require(j, "cuts", "cutpoints"), "cuts");
    if (j.contains("order")) {
      for (const auto& v : j["order"])
        cp.order.push_back(class_index(v, c, "order"));
    }
    return Partition(Partition::Variant{std::move(cp)});
  }
  if (kind == "bayes") {
    reject_unknown_keys(j, {"kind", "q"}, "bayes");
    return Partition(
        Partition::Variant{BayesRule{number_list(require(j, "q", "bayes"), "q")}});
  }
  if (kind == "boundary-split-threshold") {
    reject_unknown_keys(j, {"kind", "t", "to_first"}, "boundary-split-threshold");
    BoundarySplitThreshold b;
    b.t = number(require(j, "t", "boundary-split-threshold"), "t");
    const auto& iv = require(j, "to_first", "boundary-split-threshold");
    if (!iv.is_array()) fail("to_first must be an array of [lo, hi] pairs");
    for (const auto& pair : iv) {
      if (!pair.is_array() || pair.size() != 2)
        fail("to_first entries must be [lo, hi] pairs");
      b.to_first.push_back({number(pair[0], "to_first"), number(pair[1], "to_first")});
    }
    return Partition(Partition::Variant{std::move(b)});
  }
  fail("unknown partition kind '" + kind + "'");
}

json dump_partition(const Partition& p) {
  struct Visitor {
    json operator()(const RatioThreshold& r) const {
      return {{"kind", "ratio-threshold"}, {"t", r.t},
              {"boundary_to", r.boundary_to + 1}};
    }
    json operator()(const CutPoints1D& cp) const {
      json out = {{"kind", "cutpoints"}, {"cuts", cp.cuts}};
      if (!cp.order.empty()) {
        json order = json::array();
        for (std::size_t v : cp.order) order.push_back(v + 1);
        out["order"] = std::move(order);
      }
      return out;
    }
    json operator()(const BayesRule& b) const {
      return {{"kind", "bayes"}, {"q", b.q}};
    }
    json operator()(const BoundarySplitThreshold& b) const {
      json iv = json::array();
      for (const auto& i : b.to_first) iv.push_back(json::array({i.lo, i.hi}));
      return {{"kind", "boundary-split-threshold"}, {"t", b.t},
              {"to_first", std::move(iv)}};
    }
    json operator()(const PredicateRule&) const {
      throw unsupported_operation("a predicate rule has no JSON form");
    }
  };
  return std::visit(Visitor{}, p.raw());
}

ClassModel parse_model(const json& j) {
  if (!j.is_array() || j.size() < 2)
    fail("'classes' must be an array of at least two entries");
  std::vector<ClassEntry> entries;
  std::size_t index = 1;
  for (const auto& cls : j) {
    if (!cls.is_object()) fail("each class must be a JSON object");
    reject_unknown_keys(cls, {"label", "density"}, "class");
    std::string label = cls.contains("label")
                            ? cls["label"].get<std::string>()
                            : "class " + std::to_string(index);
    entries.push_back({std::move(label),
                       parse_density(require(cls, "density", "class"))});
    ++index;
  }
  return ClassModel(std::move(entries));
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) fail("the configuration root must be a JSON object");
  reject_unknown_keys(j,
                      {"classes", "partition", "integration", "noise", "bounds",
                       "simulate", "waterlevel", "balance", "cuts1d"},
                      "configuration");

  RunConfig cfg(parse_model(require(j, "classes", "configuration")));
  const std::size_t c = cfg.model.size();

  if (j.contains("partition"))
    cfg.partition = parse_partition(j["partition"], c);

  if (j.contains("integration")) {
    const json& b = j["integration"];
    reject_unknown_keys(
        b, {"method", "quad_tol", "mc_samples", "seed", "scan_grid", "parallel"},
        "integration");
    if (b.contains("method")) {
      const std::string m = b["method"].get<std::string>();
      if (m == "auto")
        cfg.integration.method = MethodRequest::Auto;
      else if (m == "closed-form")
        cfg.integration.method = MethodRequest::ClosedForm;
      else if (m == "quadrature")
        cfg.integration.method = MethodRequest::Quadrature;
      else if (m == "monte-carlo")
        cfg.integration.method = MethodRequest::MonteCarlo;
      else
        fail("integration.method must be auto, closed-form, quadrature, or "
             "monte-carlo");
    }
    if (b.contains("quad_tol")) cfg.integration.quad_tol = number(b["quad_tol"], "quad_tol");
    if (b.contains("mc_samples")) cfg.integration.mc_samples = b["mc_samples"].get<std::size_t>();
    if (b.contains("seed")) cfg.integration.seed = b["seed"].get<std::uint64_t>();
    if (b.contains("scan_grid")) cfg.integration.scan_grid = b["scan_grid"].get<std::size_t>();
    if (b.contains("parallel")) cfg.integration.parallel = b["parallel"].get<bool>();
  }

  if (j.contains("noise")) {
    const json& b = j["noise"];
    reject_unknown_keys(b, {"varsigma2", "grid", "shape"}, "noise");
    cfg.noise.present = true;
    if (b.contains("varsigma2") == b.contains("grid"))
      fail("noise needs exactly one of 'varsigma2' or 'grid'");
    if (b.contains("varsigma2"))
      cfg.noise.grid = {number(b["varsigma2"], "varsigma2")};
    else
      cfg.noise.grid = number_list(b["grid"], "noise.grid");
    if (cfg.noise.grid.empty()) fail("noise.grid must not be empty");
    for (std::size_t i = 0; i < cfg.noise.grid.size(); ++i) {
      if (cfg.noise.grid[i] < 0.0) fail("noise magnitudes must be >= 0");
      if (i > 0 && cfg.noise.grid[i] <= cfg.noise.grid[i - 1])
        fail("noise.grid must be strictly increasing");
    }
    if (b.contains("shape")) cfg.noise.shape = matrix(b["shape"], "noise.shape");
  }

  if (j.contains("bounds")) {
    const json& b = j["bounds"];
    reject_unknown_keys(b, {"q", "s", "assume_symmetric"}, "bounds");
    cfg.bounds.present = true;
    if (b.contains("q")) cfg.bounds.q = number_list(b["q"], "bounds.q");
    if (b.contains("s")) cfg.bounds.s = b["s"].get<std::size_t>();
    if (b.contains("assume_symmetric"))
      cfg.bounds.assume_symmetric = b["assume_symmetric"].get<bool>();
  }

  if (j.contains("simulate")) {
    const json& b = j["simulate"];
    reject_unknown_keys(b,
                        {"q", "s", "replicates", "seed", "parallel",
                         "store_replicates", "weight"},
                        "simulate");
    cfg.simulate.present = true;
    if (b.contains("q")) cfg.simulate.q = number_list(b["q"], "simulate.q");
    if (b.contains("s")) cfg.simulate.options.s = b["s"].get<std::size_t>();
    if (b.contains("replicates"))
      cfg.simulate.options.replicates = b["replicates"].get<std::size_t>();
    if (b.contains("seed")) cfg.simulate.options.seed = b["seed"].get<std::uint64_t>();
    if (b.contains("parallel")) cfg.simulate.options.parallel = b["parallel"].get<bool>();
    if (b.contains("store_replicates"))
      cfg.simulate.options.store_replicates = b["store_replicates"].get<bool>();
    if (b.contains("weight"))
      cfg.simulate.options.weight = matrix(b["weight"], "simulate.weight");
  }

  if (j.contains("waterlevel")) {
    const json& b = j["waterlevel"];
    reject_unknown_keys(b, {"tol_delta", "sweep"}, "waterlevel");
    cfg.waterlevel.present = true;
    if (b.contains("tol_delta"))
      cfg.waterlevel.tol_delta = number(b["tol_delta"], "tol_delta");
    if (b.contains("sweep")) {
      const json& s = b["sweep"];
      reject_unknown_keys(s, {"lo", "hi", "n", "log"}, "waterlevel.sweep");
      cfg.waterlevel.sweep_lo = number(require(s, "lo", "waterlevel.sweep"), "lo");
      cfg.waterlevel.sweep_hi = number(require(s, "hi", "waterlevel.sweep"), "hi");
      cfg.waterlevel.sweep_n = require(s, "n", "waterlevel.sweep").get<std::size_t>();
      if (s.contains("log")) cfg.waterlevel.sweep_log = s["log"].get<bool>();
      if (cfg.waterlevel.sweep_n < 2) fail("waterlevel.sweep.n must be >= 2");
      if (!(cfg.waterlevel.sweep_lo < cfg.waterlevel.sweep_hi))
        fail("waterlevel.sweep needs lo < hi");
      if (cfg.waterlevel.sweep_log && cfg.waterlevel.sweep_lo <= 0.0)
        fail("a log-spaced sweep needs lo > 0");
    }
  }

  if (j.contains("balance")) {
    const json& b = j["balance"];
    reject_unknown_keys(
        b, {"q_init", "max_iters", "tol", "damping", "check_trials", "check_tol"},
        "balance");
    cfg.balance.present = true;
    if (b.contains("q_init")) cfg.balance.q_init = number_list(b["q_init"], "q_init");
    if (b.contains("max_iters"))
      cfg.balance.options.max_iters = b["max_iters"].get<std::size_t>();
    if (b.contains("tol")) cfg.balance.options.tol = number(b["tol"], "tol");
    if (b.contains("damping")) cfg.balance.options.damping = number(b["damping"], "damping");
    if (b.contains("check_trials"))
      cfg.balance.check_trials = b["check_trials"].get<std::size_t>();
    if (b.contains("check_tol")) cfg.balance.check_tol = number(b["check_tol"], "check_tol");
  }

  if (j.contains("cuts1d")) {
    const json& b = j["cuts1d"];
    reject_unknown_keys(b, {"init", "step", "rounds", "max_sweeps"}, "cuts1d");
    cfg.cuts1d.present = true;
    if (b.contains("init")) cfg.cuts1d.init = number_list(b["init"], "init");
    if (b.contains("step"))
      cfg.cuts1d.options.initial_step = number(b["step"], "step");
    if (b.contains("rounds")) cfg.cuts1d.options.rounds = b["rounds"].get<std::size_t>();
    if (b.contains("max_sweeps"))
      cfg.cuts1d.options.max_sweeps = b["max_sweeps"].get<std::size_t>();
  }

  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);  // allow // and /* */ comments
  } catch (const json::exception& e) {
    fail("config '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    fail("config '" + path + "': " + e.what());
  }
}

json dump_config(const RunConfig& cfg) {
  json j;
  json classes = json::array();
  for (std::size_t k = 0; k < cfg.model.size(); ++k)
    classes.push_back({{"label", cfg.model.label(k)},
                       {"density", dump_density(cfg.model.density(k))}});
  j["classes"] = std::move(classes);

  if (cfg.partition) j["partition"] = dump_partition(*cfg.partition);

  {
    const IntegrationSettings d{};
    const auto& s = cfg.integration;
    json b;
    const char* names[] = {"auto", "closed-form", "quadrature", "monte-carlo"};
    if (s.method != d.method) b["method"] = names[static_cast<int>(s.method)];
    if (s.quad_tol != d.quad_tol) b["quad_tol"] = s.quad_tol;
    if (s.mc_samples != d.mc_samples) b["mc_samples"] = s.mc_samples;
    if (s.seed != d.seed) b["seed"] = s.seed;
    if (s.scan_grid != d.scan_grid) b["scan_grid"] = s.scan_grid;
    if (s.parallel != d.parallel) b["parallel"] = s.parallel;
    if (!b.empty()) j["integration"] = std::move(b);
  }

  if (cfg.noise.present) {
    json b;
    if (cfg.noise.grid.size() == 1)
      b["varsigma2"] = cfg.noise.grid.front();
    else
      b["grid"] = cfg.noise.grid;
    if (cfg.noise.shape.size() > 0) b["shape"] = matrix_json(cfg.noise.shape);
    j["noise"] = std::move(b);
  }

  if (cfg.bounds.present) {
    json b;
    if (!cfg.bounds.q.empty()) b["q"] = cfg.bounds.q;
    b["s"] = cfg.bounds.s;
    if (cfg.bounds.assume_symmetric) b["assume_symmetric"] = true;
    j["bounds"] = std::move(b);
  }

  if (cfg.simulate.present) {
    json b;
    if (!cfg.simulate.q.empty()) b["q"] = cfg.simulate.q;
    b["s"] = cfg.simulate.options.s;
    b["replicates"] = cfg.simulate.options.replicates;
    b["seed"] = cfg.simulate.options.seed;
    if (!cfg.simulate.options.parallel) b["parallel"] = false;
    if (cfg.simulate.options.store_replicates) b["store_replicates"] = true;
    if (cfg.simulate.options.weight)
      b["weight"] = matrix_json(*cfg.simulate.options.weight);
    j["simulate"] = std::move(b);
  }

  if (cfg.waterlevel.present) {
    json b;
    b["tol_delta"] = cfg.waterlevel.tol_delta;
    if (cfg.waterlevel.sweep_n > 0)
      b["sweep"] = {{"lo", cfg.waterlevel.sweep_lo},
                    {"hi", cfg.waterlevel.sweep_hi},
                    {"n", cfg.waterlevel.sweep_n},
                    {"log", cfg.waterlevel.sweep_log}};
    j["waterlevel"] = std::move(b);
  }

  if (cfg.balance.present) {
    json b;
    if (!cfg.balance.q_init.empty()) b["q_init"] = cfg.balance.q_init;
    b["max_iters"] = cfg.balance.options.max_iters;
    b["tol"] = cfg.balance.options.tol;
    b["damping"] = cfg.balance.options.damping;
    if (cfg.balance.check_trials > 0) {
      b["check_trials"] = cfg.balance.check_trials;
      b["check_tol"] = cfg.balance.check_tol;
    }
    j["balance"] = std::move(b);
  }

  if (cfg.cuts1d.present) {
    json b;
    if (!cfg.cuts1d.init.empty()) b["init"] = cfg.cuts1d.init;
    b["step"] = cfg.cuts1d.options.initial_step;
    b["rounds"] = cfg.cuts1d.options.rounds;
    b["max_sweeps"] = cfg.cuts1d.options.max_sweeps;
    j["cuts1d"] = std::move(b);
  }

  return j;
}

} // namespace rhomax::config
