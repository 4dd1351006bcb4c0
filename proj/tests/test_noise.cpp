#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rhomax/noise.hpp"

using namespace rhomax;

namespace {

ClassModel gauss_pair() {
  std::vector<ClassEntry> e;
  e.push_back({"left", Density(Gaussian1D{-1.0, 1.0})});
  e.push_back({"right", Density(Gaussian1D{1.0, 1.0})});
  return ClassModel(std::move(e));
}

// Two bumps around the unit gap against a far-away box; the gap means a
// mid-gap cut separates perfectly without noise.
ClassModel gap_pair() {
  std::vector<ClassEntry> e;
  e.push_back({"split-box",
               Density(PiecewiseUniform{{{0.0, 0.6, 1.0}, {1.0, 1.4, 1.0}}})});
  e.push_back({"far-box", Density(UniformInterval{10.0, 11.0})});
  return ClassModel(std::move(e));
}

const Eigen::MatrixXd kIdentity1 = Eigen::MatrixXd::Identity(1, 1);

} // namespace

TEST_SUITE("noise") {

TEST_CASE("symmetric gaussians follow the closed form") {
  // Smoothing N(-1,1) vs N(+1,1) with variance v gives two unit-gap
  // gaussians of sd sqrt(1+v): the balanced radius is 1 - Phi(1/sqrt(1+v)).
  const auto model = gauss_pair();
  const std::vector<double> grid{0.0, 0.25, 1.0, 4.0};
  const auto sweep = rho_star_vs_noise(model, kIdentity1, grid);
  REQUIRE(sweep.points.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double expect = 1.0 - oracle::Phi(1.0 / std::sqrt(1.0 + grid[i]));
    CHECK(sweep.points[i].varsigma2 == grid[i]);
    CHECK(sweep.points[i].rho_star ==
          doctest::Approx(expect).epsilon(1e-7));
    CHECK(sweep.points[i].t_star == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_FALSE(sweep.points[i].rho_fixed.has_value());
  }
  CHECK(sweep.points[3].rho_star ==
        doctest::Approx(1.0 - oracle::Phi(1.0 / std::sqrt(5.0)))
            .epsilon(1e-9));
  CHECK(sweep.rho_star_monotone);
}

TEST_CASE("a fixed partition can improve under noise; the optimum cannot") {
  const auto model = gap_pair();
  Partition fixed{Partition::Variant{CutPoints1D{{1.0}, {}}}};
  const std::vector<double> grid{0.0, 0.0025};
  const auto sweep = rho_star_vs_noise(model, kIdentity1, grid, &fixed);
  REQUIRE(sweep.points.size() == 2);

  // Supports are disjoint, so re-optimizing always separates perfectly.
  CHECK(sweep.points[0].rho_star == doctest::Approx(0.0));
  CHECK(sweep.points[1].rho_star <= 1e-9);
  CHECK(sweep.rho_star_monotone);

  // The mid-bump cut misroutes the upper bump: radius 0.4 without noise.
  REQUIRE(sweep.points[0].rho_fixed.has_value());
  REQUIRE(sweep.points[1].rho_fixed.has_value());
  CHECK(*sweep.points[0].rho_fixed == doctest::Approx(0.4).epsilon(1e-10));
  // Smoothing leaks mass back across the cut: the fixed radius DROPS.
  CHECK(*sweep.points[1].rho_fixed < *sweep.points[0].rho_fixed - 0.01);
  CHECK(*sweep.points[1].rho_fixed ==
        doctest::Approx(0.380052886).epsilon(1e-6));
}

TEST_CASE("fixed-partition radius matches a direct oracle integral") {
  const auto model = gap_pair();
  Partition fixed{Partition::Variant{CutPoints1D{{1.0}, {}}}};
  const double s2 = 0.0025, sigma = 0.05;
  const double rho =
      fixed_partition_rho(model, fixed, NoiseSpec(s2, kIdentity1));

  // Oracle: p1-mass beyond the cut after exact smoothing of both segments.
  auto smoothed = [&](double x) {
    auto seg = [&](double lo, double hi) {
      return oracle::Phi((x - lo) / sigma) - oracle::Phi((x - hi) / sigma);
    };
    return seg(0.0, 0.6) + seg(1.0, 1.4);
  };
  const double leak = oracle::integrate(smoothed, 1.0, 2.5, 1e-12);
  CHECK(rho == doctest::Approx(leak).epsilon(1e-8));

  // With no noise it reduces to the plain confusion radius.
  const double plain =
      fixed_partition_rho(model, fixed, NoiseSpec(0.0, kIdentity1));
  CHECK(plain == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("sweep input is validated") {
  const auto model = gauss_pair();
  CHECK_THROWS_AS(
      (void)rho_star_vs_noise(model, kIdentity1, {}), config_error);
  CHECK_THROWS_AS(
      (void)rho_star_vs_noise(model, kIdentity1, {1.0, 0.5}), config_error);
  CHECK_THROWS_AS(
      (void)rho_star_vs_noise(model, kIdentity1, {-0.5, 1.0}), config_error);
  CHECK_THROWS_AS(
      (void)rho_star_vs_noise(model, 2.0 * kIdentity1, {0.1}), config_error);

  std::vector<ClassEntry> e;
  e.push_back({"a", Density(UniformInterval{0, 1})});
  e.push_back({"b", Density(UniformInterval{1, 2})});
  e.push_back({"c", Density(UniformInterval{2, 3})});
  ClassModel three(std::move(e));
  CHECK_THROWS_AS(
      (void)rho_star_vs_noise(three, kIdentity1, {0.1}), config_error);
}

} // TEST_SUITE
