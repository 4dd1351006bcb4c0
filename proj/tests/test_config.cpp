#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "rhomax/config.hpp"

using namespace rhomax;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({
    "classes": [
      {"label": "a", "density": {"kind": "gaussian", "mean": -1, "sd": 1}},
      {"label": "b", "density": {"kind": "gaussian", "mean": 1, "sd": 1}}
    ]
  })");
}

std::filesystem::path write_temp(const std::string& text) {
  static int counter = 0;
  const auto path =
      std::filesystem::temp_directory_path() /
      ("rhomax-config-test-" + std::to_string(++counter) + ".json");
  std::ofstream out(path);
  out << text;
  return path;
}

} // namespace

TEST_SUITE("config") {

TEST_CASE("a minimal two-class config parses") {
  const auto cfg = config::parse_config(minimal());
  CHECK(cfg.model.size() == 2);
  CHECK(cfg.model.label(0) == "a");
  CHECK_FALSE(cfg.partition.has_value());
  CHECK_FALSE(cfg.bounds.present);
  CHECK(cfg.integration.method == MethodRequest::Auto);
}

TEST_CASE("dumping and reparsing is idempotent") {
  json j = minimal();
  j["partition"] = {{"kind", "cutpoints"}, {"cuts", {0.0}}};
  j["bounds"] = {{"q", {0.25, 0.75}}, {"s", 250}};
  j["integration"] = {{"method", "quadrature"}, {"quad_tol", 1e-9}};
  j["noise"] = {{"grid", {0.0, 0.5, 1.0}}};
  j["waterlevel"] = {{"tol_delta", 1e-9},
                     {"sweep", {{"lo", 0.5}, {"hi", 4.0}, {"n", 11}}}};
  j["balance"] = {{"q_init", {0.5, 0.5}}, {"max_iters", 99}};
  j["cuts1d"] = {{"init", {0.1}}, {"step", 0.02}};
  j["simulate"] = {{"q", {0.5, 0.5}}, {"s", 100}, {"replicates", 50}};

  const auto once = config::parse_config(j);
  const json dumped = config::dump_config(once);
  const auto twice = config::parse_config(dumped);
  CHECK(config::dump_config(twice) == dumped);

  CHECK(once.bounds.s == 250);
  CHECK(once.integration.quad_tol == 1e-9);
  CHECK(once.noise.grid.size() == 3);
  CHECK(once.waterlevel.sweep_n == 11);
  CHECK(once.balance.options.max_iters == 99);
  CHECK(once.cuts1d.options.initial_step == 0.02);
  CHECK(once.simulate.options.replicates == 50);
}

TEST_CASE("class indices are 1-based on disk and 0-based in code") {
  json j = minimal();
  j["classes"].push_back(
      {{"label", "c"}, {"density", {{"kind", "uniform"}, {"lo", 0}, {"hi", 1}}}});
  j["partition"] = {{"kind", "cutpoints"},
                    {"cuts", {-0.5, 0.5}},
                    {"order", {3, 2, 1}}};
  const auto cfg = config::parse_config(j);
  const auto* cuts = cfg.partition->get_if<CutPoints1D>();
  REQUIRE(cuts != nullptr);
  REQUIRE(cuts->order.size() == 3);
  CHECK(cuts->order[0] == 2);
  CHECK(cuts->order[1] == 1);
  CHECK(cuts->order[2] == 0);

  const json back = config::dump_partition(*cfg.partition);
  CHECK(back["order"] == json({3, 2, 1}));

  json ratio = minimal();
  ratio["partition"] = {{"kind", "ratio-threshold"},
                        {"t", 2.0},
                        {"boundary_to", 2}};
  const auto rc = config::parse_config(ratio);
  CHECK(rc.partition->get_if<RatioThreshold>()->boundary_to == 1);
}

TEST_CASE("density kinds round-trip through json") {
  for (const char* text : {
           R"({"kind": "gaussian", "mean": 0.5, "sd": 2})",
           R"({"kind": "weibull", "shape": 2, "scale": 1})",
           R"({"kind": "uniform", "lo": 0, "hi": 1})",
           R"({"kind": "piecewise-uniform",
               "segments": [[0, 0.5, 1.0], [1, 1.5, 1.0]]})",
           R"({"kind": "smoothed-piecewise-uniform",
               "segments": [[0, 1, 1.0]], "sigma": 0.1})",
           R"({"kind": "mixture", "weights": [0.3, 0.7], "components": [
               {"kind": "gaussian", "mean": 0, "sd": 1},
               {"kind": "gaussian", "mean": 3, "sd": 1}]})",
           R"({"kind": "grid", "axes": [[0, 1, 2]], "values": [0, 1, 0],
               "interp": "multilinear"})",
           R"({"kind": "gaussian-nd", "mean": [0, 2],
               "cov": [[4, 0], [0, 1]]})",
           R"({"kind": "empirical", "points": [0.1, 0.2, 0.3]})",
       }) {
    const json j = json::parse(text);
    const Density d = config::parse_density(j);
    const json dumped = config::dump_density(d);
    const Density d2 = config::parse_density(dumped);
    CHECK(config::dump_density(d2) == dumped);
  }
}

TEST_CASE("unknown keys and kinds are rejected loudly") {
  json j = minimal();
  j["typo-block"] = 1;
  CHECK_THROWS_AS((void)config::parse_config(j), config_error);

  json bad_kind = minimal();
  bad_kind["classes"][0]["density"]["kind"] = "cauchy";
  CHECK_THROWS_AS((void)config::parse_config(bad_kind), config_error);

  json extra = minimal();
  extra["classes"][0]["density"]["scale"] = 2;
  CHECK_THROWS_AS((void)config::parse_config(extra), config_error);

  json bad_method = minimal();
  bad_method["integration"] = {{"method", "psychic"}};
  CHECK_THROWS_AS((void)config::parse_config(bad_method), config_error);

  json bad_partition = minimal();
  bad_partition["partition"] = {{"kind", "voronoi"}};
  CHECK_THROWS_AS((void)config::parse_config(bad_partition), config_error);
}

TEST_CASE("noise block needs exactly one magnitude specification") {
  json both = minimal();
  both["noise"] = {{"varsigma2", 0.5}, {"grid", {0.1, 0.2}}};
  CHECK_THROWS_AS((void)config::parse_config(both), config_error);

  json neither = minimal();
  neither["noise"] = json::object();
  CHECK_THROWS_AS((void)config::parse_config(neither), config_error);

  json descending = minimal();
  descending["noise"] = {{"grid", {0.2, 0.1}}};
  CHECK_THROWS_AS((void)config::parse_config(descending), config_error);

  json single = minimal();
  single["noise"] = {{"varsigma2", 0.5}};
  const auto cfg = config::parse_config(single);
  REQUIRE(cfg.noise.grid.size() == 1);
  CHECK(cfg.noise.grid[0] == 0.5);
}

TEST_CASE("files load with comments allowed") {
  const auto path = write_temp(R"({
    // measurement model: two unit-variance gaussians
    "classes": [
      {"label": "a", "density": {"kind": "gaussian", "mean": -1, "sd": 1}},
      {"label": "b", "density": {"kind": "gaussian", "mean": 1, "sd": 1}}
    ]
  })");
  const auto cfg = config::load_config(path.string());
  CHECK(cfg.model.size() == 2);
  std::filesystem::remove(path);
}

TEST_CASE("broken files raise configuration errors, not parser internals") {
  const auto path = write_temp("{ not json");
  CHECK_THROWS_AS((void)config::load_config(path.string()), config_error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS((void)config::load_config("/nonexistent/nowhere.json"),
                  config_error);
}

TEST_CASE("the shipped example configs parse and round-trip") {
  const std::filesystem::path root = RHOMAX_SOURCE_ROOT;
  for (const char* name :
       {"weibull_pair.json", "gaussian2d_pair.json", "uniforms_3class.json"}) {
    const auto path = root / "docs" / "examples" / name;
    REQUIRE(std::filesystem::exists(path));
    const auto cfg = config::load_config(path.string());
    CHECK(cfg.model.size() >= 2);
    const json dumped = config::dump_config(cfg);
    const auto reparsed = config::parse_config(dumped);
    CHECK(config::dump_config(reparsed) == dumped);
  }
}

} // TEST_SUITE
