#include <doctest.h>

#include <cmath>
#include <vector>

#include "builders.hpp"
#include "oracles.hpp"
#include "rhomax/multiclass.hpp"

using namespace rhomax;

namespace {

ClassModel three_gauss() {
  std::vector<ClassEntry> e;
  e.push_back({"low", Density(Gaussian1D{-2.0, 1.0})});
  e.push_back({"mid", Density(Gaussian1D{0.0, 1.0})});
  e.push_back({"high", Density(Gaussian1D{2.0, 1.0})});
  return ClassModel(std::move(e));
}

ClassModel three_uniforms() {
  std::vector<ClassEntry> e;
  e.push_back({"low", Density(UniformInterval{0.0, 1.0})});
  e.push_back({"mid", Density(UniformInterval{0.9, 1.9})});
  e.push_back({"high", Density(UniformInterval{1.5, 2.5})});
  return ClassModel(std::move(e));
}

double radius_at(const ClassModel& model, const std::vector<double>& q) {
  const auto part = bayes_partition(model, q);
  return gershgorin(confusion_matrix(model, part)).rho_max;
}

} // namespace

TEST_SUITE("multiclass") {

TEST_CASE("equal-diagonal prevalence of three shifted gaussians") {
  const auto truth = oracle::three_gauss_truth();
  const auto model = three_gauss();
  const auto r = balance_prevalence(model, Prevalence::uniform(3));

  CHECK(r.converged);
  CHECK(r.residual <= 1e-6);
  CHECK(r.q_star[0] == doctest::Approx(truth.q1).epsilon(2e-5));
  CHECK(r.q_star[1] == doctest::Approx(truth.q2).epsilon(2e-5));
  CHECK(r.q_star[2] == doctest::Approx(truth.q1).epsilon(2e-5));
  CHECK(r.rho_star == doctest::Approx(truth.rho_star).epsilon(1e-6));

  // All three diagonals sit on the common value 1 - rho_star.
  for (int k = 0; k < 3; ++k) {
    CHECK(r.p_star.entries(k, k) ==
          doctest::Approx(truth.diagonal).epsilon(1e-6));
  }
}

TEST_CASE("perturbing the balanced prevalence always hurts") {
  const auto model = three_gauss();
  const auto r = balance_prevalence(model, Prevalence::uniform(3));
  const double q1 = r.q_star[0], q2 = r.q_star[1], q3 = r.q_star[2];

  const std::vector<std::vector<double>> probes{
      {q1 + 0.02, q2 - 0.02, q3},
      {q1 - 0.02, q2 + 0.02, q3},
      {q1, q2 - 0.03, q3 + 0.03},
      {q1 + 0.015, q2, q3 - 0.015},
  };
  for (const auto& probe : probes) {
    CHECK(radius_at(model, probe) > r.rho_star + 1e-4);
  }
}

TEST_CASE("random-prevalence certificate passes on the balanced model") {
  const auto model = three_gauss();
  const auto r = balance_prevalence(model, Prevalence::uniform(3));
  const auto check =
      verify_balance_optimality(model, r.rho_star, 50, 424242, 1e-4);
  CHECK(check.trials == 50);
  CHECK(check.failures == 0);
  CHECK(check.pass);
  CHECK(check.worst_margin > 0.0);

  // Overstating the optimum must be refuted: random probes do better.
  const auto refute =
      verify_balance_optimality(model, r.rho_star + 0.05, 50, 424242, 1e-4);
  CHECK_FALSE(refute.pass);
  CHECK(refute.failures > 0);
}

TEST_CASE("balancing is deterministic") {
  const auto model = three_gauss();
  const auto a = balance_prevalence(model, Prevalence::uniform(3));
  const auto b = balance_prevalence(model, Prevalence::uniform(3));
  CHECK(a.q_star[0] == b.q_star[0]);
  CHECK(a.q_star[1] == b.q_star[1]);
  CHECK(a.rho_star == b.rho_star);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("indistinguishable classes cannot balance and say so") {
  std::vector<ClassEntry> e;
  e.push_back({"a", Density(UniformInterval{0.0, 1.0})});
  e.push_back({"b", Density(UniformInterval{0.0, 1.0})});
  ClassModel model(std::move(e));
  BalanceOptions opts;
  opts.max_iters = 60;
  const auto r = balance_prevalence(model, Prevalence::uniform(2), opts);
  // Whatever prevalence is tried, the argmax takes the whole line: one
  // diagonal is 1 and the other 0, so no equal-diagonal point exists.
  CHECK_FALSE(r.converged);
  CHECK(r.residual >= 0.49);
}

TEST_CASE("balance input is validated") {
  const auto model = three_gauss();
  CHECK_THROWS_AS((void)balance_prevalence(
                      model, Prevalence({0.5, 0.5}), BalanceOptions{}),
                  config_error);
  BalanceOptions bad_damping;
  bad_damping.damping = 0.0;
  CHECK_THROWS_AS((void)balance_prevalence(model, Prevalence::uniform(3),
                                           bad_damping),
                  config_error);
  bad_damping.damping = 1.5;
  CHECK_THROWS_AS((void)balance_prevalence(model, Prevalence::uniform(3),
                                           bad_damping),
                  config_error);
}

TEST_CASE("cut descent recovers the optimal interval partition") {
  const auto model = three_uniforms();
  CutOptimOptions opts;  // step 0.01, three rounds
  const auto r = optimize_cutpoints_1d(model, {1.2, 1.6}, opts);
  CHECK(r.converged);
  REQUIRE(r.cuts.size() == 2);
  CHECK(r.cuts[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(r.cuts[1] == doctest::Approx(1.7).epsilon(1e-6));
  CHECK(r.rho_max == doctest::Approx(0.2).epsilon(1e-9));
  // Among the radius-0.2 ties the trace-maximal representative wins.
  CHECK(r.trace == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(r.evaluations > 0);
}

TEST_CASE("cut descent on the gaussian triplet is monotone and deterministic") {
  const auto model = three_gauss();
  const std::vector<double> init{-0.8, 0.8};
  const auto before = confusion_matrix(
      model, Partition{Partition::Variant{CutPoints1D{init, {}}}});
  const auto r = optimize_cutpoints_1d(model, init);
  CHECK(r.converged);
  REQUIRE(r.cuts.size() == 2);
  CHECK(r.cuts[0] < r.cuts[1]);
  // Never worse than the start, never better than the minimax value (every
  // interval partition's radius is bounded below by it).
  const auto truth = oracle::three_gauss_truth();
  CHECK(r.rho_max <= gershgorin(before).rho_max + 1e-12);
  CHECK(r.rho_max >= truth.rho_star - 1e-9);

  // The descent is a pure function of its inputs.
  const auto again = optimize_cutpoints_1d(model, init);
  CHECK(again.cuts == r.cuts);
  CHECK(again.evaluations == r.evaluations);

  // Symmetric cuts (-c, c) equalizing the middle column 2 Phi(-c) with the
  // outer columns 1 - Phi(2 - c) tie all three columns, so they are the
  // minimax partition; coordinate moves cannot improve on them and the
  // descent recognizes the fixed point.
  const double c_star = oracle::bisect(
      [](double c) {
        return 2.0 * oracle::Phi(-c) - (1.0 - oracle::Phi(2.0 - c));
      },
      0.5, 2.0, 1e-13);
  const auto at_opt = optimize_cutpoints_1d(model, {-c_star, c_star});
  CHECK(at_opt.cuts[0] == doctest::Approx(-c_star).epsilon(1e-12));
  CHECK(at_opt.cuts[1] == doctest::Approx(c_star).epsilon(1e-12));
  CHECK(std::fabs(at_opt.rho_max - truth.rho_star) <= 1e-6);
}

TEST_CASE("cut descent validates its input") {
  const auto model = three_uniforms();
  CHECK_THROWS_AS((void)optimize_cutpoints_1d(model, {1.0}), config_error);
  CutOptimOptions bad;
  bad.initial_step = 0.0;
  CHECK_THROWS_AS((void)optimize_cutpoints_1d(model, {1.2, 1.6}, bad),
                  config_error);
  bad.initial_step = 0.01;
  bad.rounds = 0;
  CHECK_THROWS_AS((void)optimize_cutpoints_1d(model, {1.2, 1.6}, bad),
                  config_error);

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  std::vector<ClassEntry> e;
  e.push_back({"a", testutil::gauss_nd(mu, Eigen::MatrixXd::Identity(2, 2))});
  e.push_back({"b", testutil::gauss_nd(Eigen::VectorXd::Ones(2),
                                       Eigen::MatrixXd::Identity(2, 2))});
  ClassModel planar(std::move(e));
  CHECK_THROWS_AS((void)optimize_cutpoints_1d(planar, {0.5}), config_error);
}

} // TEST_SUITE
