#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rhomax/bounds.hpp"

using namespace rhomax;

namespace {

ConfusionMatrix wrap(Eigen::MatrixXd m) {
  return make_confusion(std::move(m), 1e-9, ConfusionMethod::ClosedForm);
}

ConfusionMatrix sym2(double rho) {
  Eigen::MatrixXd m(2, 2);
  m << 1 - rho, rho, rho, 1 - rho;
  return wrap(std::move(m));
}

} // namespace

TEST_SUITE("bounds") {

TEST_CASE("prevalence vectors are validated simplex points") {
  CHECK_THROWS_AS(Prevalence({0.5, 0.6}), config_error);
  CHECK_THROWS_AS(Prevalence({-0.1, 1.1}), config_error);
  CHECK_THROWS_AS(Prevalence({1.0}), config_error);

  const auto u = Prevalence::uniform(4);
  CHECK(u.size() == 4);
  CHECK(u[2] == doctest::Approx(0.25).epsilon(1e-15));

  const auto ind = Prevalence::indicator(3, 1);
  CHECK(ind[0] == 0.0);
  CHECK(ind[1] == 1.0);
  CHECK(ind[2] == 0.0);
}

TEST_CASE("multinomial variance term") {
  CHECK(multinomial_term(Prevalence({0.5, 0.5}), 100) ==
        doctest::Approx(0.005).epsilon(1e-15));
  CHECK(multinomial_term(Prevalence::uniform(3), 100) ==
        doctest::Approx(2.0 / 300.0).epsilon(1e-14));
  CHECK(multinomial_term(Prevalence::indicator(3, 0), 50) == 0.0);
}

TEST_CASE("expected error and its prevalence-free bound") {
  Eigen::MatrixXd m(2, 2);
  m << 0.9, 0.2, 0.1, 0.8;
  const auto p = wrap(std::move(m));
  CHECK(classification_error(p, Prevalence({0.3, 0.7})) ==
        doctest::Approx(0.3 * 0.1 + 0.7 * 0.2).epsilon(1e-14));
  CHECK(error_bound(p) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("the error bound is attained at the worst column") {
  std::mt19937_64 gen(101);
  for (int rep = 0; rep < 100; ++rep) {
    const int c = 2 + int(gen() % 7);
    const auto p = wrap(oracle::random_dominant(gen, c));
    const auto g = gershgorin(p);
    const auto worst = Prevalence::indicator(p.size(), g.argmax_column);
    CHECK(std::fabs(classification_error(p, worst) - error_bound(p)) <= 1e-12);
    // ... and never exceeded anywhere else.
    CHECK(classification_error(p, Prevalence::uniform(p.size())) <=
          error_bound(p) + 1e-12);
  }
}

TEST_CASE("variance bounds reproduce the worked two-class numbers") {
  // rho = 0.1, s = 100, uniform prevalence: loose 0.010625, tight 0.0078125.
  const auto r = variance_bounds(sym2(0.1), Prevalence({0.5, 0.5}), 100);
  CHECK(r.c == 2);
  CHECK(r.s == 100);
  CHECK(r.rho_max == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(r.error_bound == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(r.multinomial == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(r.eps_rho == doctest::Approx(0.36 / 64.0).epsilon(1e-13));
  CHECK(r.eps_sigma == doctest::Approx(0.010625).epsilon(1e-13));
  CHECK(r.eps_rho_tight == doctest::Approx(0.18 / 64.0).epsilon(1e-13));
  CHECK(r.eps_sigma_tight == doctest::Approx(0.0078125).epsilon(1e-13));
  CHECK(r.tight_certified);  // detected: the matrix is symmetric
}

TEST_CASE("the tight tier needs symmetry or an explicit assertion") {
  Eigen::MatrixXd m(2, 2);
  m << 0.9, 0.15, 0.1, 0.85;
  const auto p = wrap(std::move(m));
  const auto plain = variance_bounds(p, Prevalence({0.5, 0.5}), 100);
  CHECK_FALSE(plain.tight_certified);
  const auto asserted = variance_bounds(p, Prevalence({0.5, 0.5}), 100, true);
  CHECK(asserted.tight_certified);
  CHECK(asserted.eps_sigma_tight < asserted.eps_sigma);
}

TEST_CASE("bounds blow up when dominance fails") {
  CHECK_THROWS_AS(
      (void)variance_bounds(sym2(0.5), Prevalence({0.5, 0.5}), 100),
      property_violation);
  Eigen::MatrixXd m(2, 2);
  m << 0.4, 0.6, 0.6, 0.4;
  CHECK_THROWS_AS(
      (void)variance_bounds(wrap(std::move(m)), Prevalence({0.5, 0.5}), 100),
      property_violation);
}

TEST_CASE("bounds shrink with sample size and grow with overlap") {
  const auto q = Prevalence({0.5, 0.5});
  const auto small_s = variance_bounds(sym2(0.1), q, 100);
  const auto big_s = variance_bounds(sym2(0.1), q, 10'000);
  CHECK(big_s.eps_sigma < small_s.eps_sigma);

  const auto clean = variance_bounds(sym2(0.02), q, 100);
  const auto noisy = variance_bounds(sym2(0.2), q, 100);
  CHECK(clean.eps_sigma < noisy.eps_sigma);
}

TEST_CASE("weighted error multiplier is the squared spectral norm") {
  CHECK(weighted_variance_multiplier(Eigen::MatrixXd::Identity(3, 3)) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(weighted_variance_multiplier(2.0 * Eigen::MatrixXd::Identity(2, 2)) ==
        doctest::Approx(4.0).epsilon(1e-13));
  Eigen::MatrixXd a(2, 2);
  a << 3, 0, 0, 1;
  CHECK(weighted_variance_multiplier(a) == doctest::Approx(9.0).epsilon(1e-13));
}

} // TEST_SUITE
