#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rhomax/integrate.hpp"
#include "rhomax/mathutil.hpp"

using namespace rhomax;

TEST_SUITE("integrate") {

TEST_CASE("polynomials are exact on a single panel") {
  const auto r = integrate([](double x) { return x * x; }, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(r.evals == 15);  // Kronrod pair accepted without splitting
}

TEST_CASE("classic smooth integrands") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0,
                  3.14159265358979323846, 1e-12)
            .value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 40.0, 1e-12)
            .value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("gaussian mass over a wide window") {
  const auto r =
      integrate([](double x) { return norm_pdf(x); }, -10.0, 10.0, 1e-12);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.error <= 1e-12);
}

TEST_CASE("a narrow spike is found by adaptive splitting") {
  // Normal bump with sd 1e-3 at 0.5: invisible to any fixed coarse rule.
  const double sd = 1e-3;
  const auto r = integrate(
      [&](double x) { return norm_pdf((x - 0.5) / sd) / sd; }, 0.0, 1.0, 1e-10);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.evals > 15);
}

TEST_CASE("degenerate and reversed intervals integrate to zero") {
  CHECK(integrate([](double x) { return x; }, 2.0, 2.0).value == 0.0);
  CHECK(integrate([](double x) { return x; }, 3.0, 2.0).value == 0.0);
}

TEST_CASE("piecewise splitting handles kinks and jumps exactly") {
  const auto kink =
      integrate_pieces([](double x) { return std::fabs(x); }, {-1.0, 0.0, 1.0});
  CHECK(kink.value == doctest::Approx(1.0).epsilon(1e-14));

  const auto jump = integrate_pieces(
      [](double x) { return x < 0.25 ? 2.0 : 0.5; }, {0.0, 0.25, 1.0}, 1e-12);
  CHECK(jump.value == doctest::Approx(2.0 * 0.25 + 0.5 * 0.75).epsilon(1e-14));

  CHECK(integrate_pieces([](double x) { return x; }, {1.0}).value == 0.0);
}

TEST_CASE("results agree with an independent Simpson oracle") {
  auto f = [](double x) { return std::exp(-0.3 * x) * std::cos(2.0 * x); };
  const double mine = integrate(f, 0.0, 6.0, 1e-12).value;
  const double ref = oracle::integrate(f, 0.0, 6.0, 1e-12);
  CHECK(mine == doctest::Approx(ref).epsilon(1e-10));
}

} // TEST_SUITE
