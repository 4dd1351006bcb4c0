#include <doctest.h>

#include <cmath>
#include <vector>

#include "builders.hpp"
#include "oracles.hpp"
#include "rhomax/density.hpp"

using namespace rhomax;

namespace {

Density gaussian(double mean, double sd) {
  return Density(Gaussian1D{mean, sd});
}

Density uniform(double lo, double hi) {
  return Density(UniformInterval{lo, hi});
}

} // namespace

TEST_SUITE("density") {

TEST_CASE("pointwise values of the closed-form families") {
  CHECK(gaussian(0, 1)(0.0) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-15));
  CHECK(Density(Weibull{2, 1})(1.0) ==
        doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(Density(Weibull{2, 1})(-0.5) == 0.0);
  CHECK(uniform(0, 1)(0.5) == 1.0);
  CHECK(uniform(0, 1)(2.0) == 0.0);
  CHECK(uniform(2, 4)(3.0) == 0.5);
}

TEST_CASE("closed-form cdfs") {
  CHECK(Density(Weibull{2, 1}).cdf(1.0) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(uniform(0, 2).cdf(0.5) == doctest::Approx(0.25));
  CHECK(uniform(0, 2).cdf(-1) == 0.0);
  CHECK(uniform(0, 2).cdf(5) == 1.0);
  CHECK(gaussian(1, 2).cdf(1.0) == doctest::Approx(0.5));
  CHECK(gaussian(0, 1).cdf(-1.0) ==
        doctest::Approx(oracle::Phi(-1)).epsilon(1e-14));
}

TEST_CASE("every evaluable family integrates to one") {
  std::vector<Density> ds;
  ds.push_back(gaussian(3, 0.5));
  ds.push_back(Density(Weibull{1.7, 2.3}));
  ds.push_back(uniform(-1, 4));
  ds.push_back(Density(PiecewiseUniform{{{0, 0.6, 1.0}, {1, 1.4, 1.0}}}));
  ds.push_back(
      Density(SmoothedPiecewiseUniform{{{0, 0.6, 1.0}, {1, 1.4, 1.0}}, 0.3}));
  ds.push_back(Density(Mixture{{0.25, 0.75},
                               {gaussian(-2, 1), Density(Weibull{2, 1})}}));
  ds.push_back(testutil::grid_density({{0, 1, 2}}, {0, 1, 0}));
  for (const auto& d : ds) {
    CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-8));
  }

  Eigen::VectorXd mean(2);
  mean << 0, 2;
  Eigen::MatrixXd cov(2, 2);
  cov << 4, 0, 0, 1;
  CHECK(testutil::gauss_nd(mean, cov).mass() ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("piecewise-uniform construction is validated") {
  // Segments must be disjoint and carry total mass 1.
  CHECK_THROWS_AS(Density(PiecewiseUniform{{{0, 1, 0.5}}}), config_error);
  CHECK_THROWS_AS(Density(PiecewiseUniform{{{0, 1, 0.7}, {0.5, 1.5, 0.3}}}),
                  config_error);
  CHECK_NOTHROW(Density(PiecewiseUniform{{{0, 0.5, 1.0}, {1, 1.5, 1.0}}}));
}

TEST_CASE("multivariate gaussian evaluation") {
  Eigen::VectorXd mean(2);
  mean << 0, 2;
  Eigen::MatrixXd cov(2, 2);
  cov << 4, 0, 0, 1;
  Density d = testutil::gauss_nd(mean, cov);
  const double at_mean = 1.0 / (2.0 * 3.14159265358979323846 * 2.0);
  const std::vector<double> r0{0.0, 2.0};
  CHECK(d(r0) == doctest::Approx(at_mean).epsilon(1e-13));

  // Log evaluation stays finite far out in the tail.
  const std::vector<double> far{100.0, -100.0};
  CHECK(d(far) == 0.0);
  CHECK(std::isfinite(d.log_eval(far)));
  CHECK(d.log_eval(far) < -1000.0);

  Eigen::MatrixXd bad = cov;
  bad(0, 1) = bad(1, 0) = 10.0;  // not positive definite
  CHECK_THROWS_AS((void)testutil::gauss_nd(mean, bad), config_error);
}

TEST_CASE("mixture evaluation and cdf") {
  Density d{Mixture{{0.5, 0.5}, {gaussian(0, 1), gaussian(4, 1)}}};
  CHECK(d(2.0) == doctest::Approx(oracle::phi_pdf(2.0)).epsilon(1e-13));
  CHECK(d.cdf(2.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(Density(Mixture{{0.9, 0.2}, {gaussian(0, 1), gaussian(1, 1)}}),
                  config_error);
}

TEST_CASE("grid densities renormalize and interpolate") {
  Density tent = testutil::grid_density({{0, 1, 2}}, {0, 1, 0});
  CHECK(tent(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tent(0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tent(3.0) == 0.0);
  CHECK(tent.mass() == doctest::Approx(1.0).epsilon(1e-10));

  // Small numerical misnormalization is absorbed; gross ones are refused.
  Density off = testutil::grid_density({{0, 1, 2}}, {0, 1.0004, 0});
  CHECK(off(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)testutil::grid_density({{0, 1, 2}}, {0, 2, 0}),
                  config_error);

  Density nearest =
      testutil::grid_density({{0, 1}}, {1, 1}, GridInterp::Nearest);
  CHECK(nearest(0.25) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nearest.mass() == doctest::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS_AS((void)testutil::grid_density({{1, 0}}, {1, 1}), config_error);
  CHECK_THROWS_AS((void)testutil::grid_density({{0, 1}}, {0, 0}), config_error);
}

TEST_CASE("sampling matches the distribution") {
  auto rs = RandomStream::derive(7);
  std::vector<double> buf(1);

  Density u = uniform(0, 1);
  double acc = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    u.sample_into(rs, buf);
    acc += buf[0];
  }
  CHECK(acc / n == doctest::Approx(0.5).epsilon(0.004));

  Density g = gaussian(-1, 1);
  int positive = 0;
  for (int i = 0; i < n; ++i) {
    g.sample_into(rs, buf);
    positive += buf[0] > 0.0;
  }
  CHECK(double(positive) / n ==
        doctest::Approx(oracle::Phi(-1)).epsilon(0.013));
}

TEST_CASE("weibull and piecewise sampling agree with their cdfs") {
  Density w{Weibull{2, 1}};
  Density pw{PiecewiseUniform{{{0, 0.6, 1.0}, {1, 1.4, 1.0}}}};
  auto rs = RandomStream::derive(11);
  std::vector<double> buf(1);
  int w_below = 0, pw_below = 0;
  const int n = 400'000;
  for (int i = 0; i < n; ++i) {
    w.sample_into(rs, buf);
    w_below += buf[0] <= 1.0;
    pw.sample_into(rs, buf);
    pw_below += buf[0] <= 0.5;
  }
  CHECK(double(w_below) / n ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(0.01));
  CHECK(double(pw_below) / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("empirical densities sample rows and refuse evaluation") {
  Density emp{Empirical{1, {1.0, 2.0, 3.0}}};
  CHECK_FALSE(emp.evaluable());
  CHECK_THROWS_AS((void)emp(1.0), unsupported_operation);
  CHECK_THROWS_AS((void)emp.mass(), unsupported_operation);

  auto draws = emp.sample(5, 1000);
  for (double v : draws) {
    CHECK((v == 1.0 || v == 2.0 || v == 3.0));
  }

  // Empty point sets and ragged row layouts are refused at construction.
  CHECK_THROWS_AS(Density(Empirical{1, {}}), config_error);
  CHECK_THROWS_AS((Density(Empirical{2, {1.0, 2.0, 3.0}})), config_error);
}

TEST_CASE("gaussian noise convolution is exact for gaussians") {
  const NoiseSpec noise = NoiseSpec::isotropic(1, 0.25);
  Density g = gaussian(1, 2).convolved(noise);
  const double sd = std::sqrt(4.0 + 0.25);
  for (double x : {-1.0, 0.5, 1.0, 3.0}) {
    CHECK(g(x) ==
          doctest::Approx(oracle::phi_pdf((x - 1) / sd) / sd).epsilon(1e-13));
  }
}

TEST_CASE("smoothing a box gives the cdf-difference closed form") {
  const double sigma = 0.05;
  Density u = uniform(10, 11).convolved(NoiseSpec::isotropic(1, sigma * sigma));
  CHECK(u(10.5) == doctest::Approx(1.0).epsilon(1e-10));
  const double at_edge = oracle::Phi(0.0) - oracle::Phi(-1.0 / sigma);
  CHECK(u(10.0) == doctest::Approx(at_edge).epsilon(1e-12));
  CHECK(u.mass() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zero noise returns the density unchanged") {
  Density u = uniform(0, 1).convolved(NoiseSpec::isotropic(1, 0.0));
  CHECK(u.get_if<UniformInterval>() != nullptr);
  CHECK(u(0.5) == 1.0);
}

TEST_CASE("numeric convolution fallback stays close to direct smoothing") {
  const double s2 = 0.01;
  Density w = Density(Weibull{2, 1}).convolved(NoiseSpec::isotropic(1, s2));
  CHECK(w.mass() == doctest::Approx(1.0).epsilon(1e-6));
  // Oracle: integrate the Weibull pdf against the Gaussian kernel directly.
  const double sigma = std::sqrt(s2);
  auto direct = [&](double x) {
    return oracle::integrate(
        [&](double y) {
          const double pdf = 2.0 * y * std::exp(-y * y);
          return pdf * oracle::phi_pdf((x - y) / sigma) / sigma;
        },
        0.0, 6.0, 1e-10);
  };
  for (double x : {0.5, 1.0, 1.5}) {
    CHECK(w(x) == doctest::Approx(direct(x)).epsilon(2e-3));
  }
}

TEST_CASE("noise specs validate their shape matrix") {
  Eigen::MatrixXd shape(2, 2);
  shape << 1, 0, 0, 0.5;
  CHECK_NOTHROW(NoiseSpec(0.3, shape));
  shape(0, 0) = 2.0;  // largest eigenvalue must be 1
  CHECK_THROWS_AS(NoiseSpec(0.3, shape), config_error);
  CHECK_THROWS_AS(NoiseSpec(-0.1, Eigen::MatrixXd::Identity(1, 1)),
                  config_error);
}

TEST_CASE("class models validate and merge supports") {
  std::vector<ClassEntry> entries;
  entries.push_back({"a", uniform(0, 1)});
  entries.push_back({"b", uniform(0.5, 1.5)});
  ClassModel m(std::move(entries));
  CHECK(m.size() == 2);
  CHECK(m.dim() == 1);
  const Box s = m.support();
  CHECK(s.lo[0] == doctest::Approx(0.0));
  CHECK(s.hi[0] == doctest::Approx(1.5));

  std::vector<ClassEntry> one;
  one.push_back({"solo", uniform(0, 1)});
  CHECK_THROWS_AS(ClassModel(std::move(one)), config_error);

  Eigen::VectorXd mean(2);
  mean << 0, 0;
  std::vector<ClassEntry> mixed;
  mixed.push_back({"flat", uniform(0, 1)});
  mixed.push_back(
      {"plane", testutil::gauss_nd(mean, Eigen::MatrixXd::Identity(2, 2))});
  CHECK_THROWS_AS(ClassModel(std::move(mixed)), config_error);
}

} // TEST_SUITE
