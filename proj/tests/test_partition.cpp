#include <doctest.h>

#include <vector>

#include "rhomax/partition.hpp"

using namespace rhomax;

namespace {

ClassModel three_uniforms() {
  std::vector<ClassEntry> e;
  e.push_back({"low", Density(UniformInterval{0.0, 1.0})});
  e.push_back({"mid", Density(UniformInterval{0.9, 1.9})});
  e.push_back({"high", Density(UniformInterval{1.5, 2.5})});
  return ClassModel(std::move(e));
}

ClassModel gauss_pair(double m1, double m2) {
  std::vector<ClassEntry> e;
  e.push_back({"left", Density(Gaussian1D{m1, 1.0})});
  e.push_back({"right", Density(Gaussian1D{m2, 1.0})});
  return ClassModel(std::move(e));
}

} // namespace

TEST_SUITE("partition") {

TEST_CASE("cut points map intervals to classes, closed on the right") {
  const auto model = three_uniforms();
  Partition part{Partition::Variant{CutPoints1D{{0.9, 1.7}, {}}}};
  part.validate_for(model);
  CHECK(part.cells() == 3);
  CHECK(part.assign(model, 0.5) == 0);
  CHECK(part.assign(model, 0.9) == 0);   // right-closed at the cut
  CHECK(part.assign(model, 1.0) == 1);
  CHECK(part.assign(model, 1.7) == 1);
  CHECK(part.assign(model, 1.8) == 2);

  Partition flipped{Partition::Variant{CutPoints1D{{0.9, 1.7}, {2, 1, 0}}}};
  CHECK(flipped.assign(model, 0.5) == 2);
  CHECK(flipped.assign(model, 1.8) == 0);
}

TEST_CASE("malformed rules are rejected") {
  const auto model = three_uniforms();
  CHECK_THROWS_AS((Partition{Partition::Variant{CutPoints1D{{1.7, 0.9}, {}}}}),
                  config_error);
  CHECK_THROWS_AS((Partition{Partition::Variant{CutPoints1D{{}, {}}}}),
                  config_error);
  CHECK_THROWS_AS(
      (Partition{Partition::Variant{CutPoints1D{{0.9, 1.7}, {0, 0, 1}}}}),
      config_error);
  CHECK_THROWS_AS((Partition{Partition::Variant{BayesRule{{0.5, 0.6}}}}),
                  config_error);
  CHECK_THROWS_AS((Partition{Partition::Variant{RatioThreshold{-1.0, 0}}}),
                  config_error);
  CHECK_THROWS_AS((Partition{Partition::Variant{RatioThreshold{1.0, 2}}}),
                  config_error);

  // Structurally fine but wrong class count for this model.
  Partition two{Partition::Variant{RatioThreshold{1.0, 0}}};
  CHECK_THROWS_AS(two.validate_for(model), config_error);
  Partition four{Partition::Variant{BayesRule{{0.25, 0.25, 0.25, 0.25}}}};
  CHECK_THROWS_AS(four.validate_for(model), config_error);
}

TEST_CASE("ratio thresholds compare likelihoods at level t") {
  const auto model = gauss_pair(-1.0, 1.0);
  Partition part{Partition::Variant{RatioThreshold{1.0, 0}}};
  part.validate_for(model);
  CHECK(part.assign(model, -0.3) == 0);
  CHECK(part.assign(model, 0.3) == 1);
  CHECK(part.assign(model, 0.0) == 0);  // tie goes to boundary_to

  Partition tie_up{Partition::Variant{RatioThreshold{1.0, 1}}};
  CHECK(tie_up.assign(model, 0.0) == 1);
}

TEST_CASE("ratio comparison survives extreme tails") {
  const Density a{Gaussian1D{0.0, 1.0}};
  const Density b{Gaussian1D{40.0, 1.0}};
  // At x = -5 both linear-space densities underflow their ratio wildly;
  // the log-space comparison still orders them correctly.
  CHECK(ratio_compare(a, b, 1.0, -5.0) == 1);
  CHECK(ratio_compare(a, b, 1.0, 45.0) == -1);
  CHECK(ratio_compare(a, a, 1.0, 0.7) == 0);
}

TEST_CASE("bayes rules implement the map assignment") {
  const auto model = gauss_pair(-1.0, 1.0);
  const std::vector<double> q{0.5, 0.5};
  Partition map = bayes_partition(model, q);
  CHECK(map.assign(model, -0.3) == 0);
  CHECK(map.assign(model, 0.3) == 1);
  CHECK(map.assign(model, 0.0) == 0);  // tie resolves to the lowest index
}

TEST_CASE("a skewed bayes rule equals the matching ratio threshold") {
  const auto model = gauss_pair(-1.0, 1.0);
  const std::vector<double> q{0.2, 0.8};
  Partition map = bayes_partition(model, q);
  // q1 p1 > q2 p2 is the same rule as p1 > (q2/q1) p2.
  Partition ratio{Partition::Variant{RatioThreshold{4.0, 0}}};
  for (double x = -3.0; x <= 3.0; x += 0.0625) {
    CHECK(map.assign(model, x) == ratio.assign(model, x));
  }
}

TEST_CASE("degenerate prevalences send everything to one class") {
  const auto model = gauss_pair(-1.0, 1.0);
  Partition all_first = bayes_partition(model, std::vector<double>{1.0, 0.0});
  for (double x : {-2.0, 0.0, 2.0, 5.0}) {
    CHECK(all_first.assign(model, x) == 0);
  }
}

TEST_CASE("boundary-split thresholds carve the tie set explicitly") {
  std::vector<ClassEntry> e;
  e.push_back({"a", Density(UniformInterval{0.0, 1.0})});
  e.push_back({"b", Density(UniformInterval{0.0, 1.0})});
  ClassModel model(std::move(e));
  Partition part{
      Partition::Variant{BoundarySplitThreshold{1.0, {{0.0, 0.5}}}}};
  part.validate_for(model);
  CHECK(part.assign(model, 0.25) == 0);  // tie point inside to_first
  CHECK(part.assign(model, 0.75) == 1);  // tie point outside
}

TEST_CASE("predicate rules pass through and are range-checked") {
  const auto model = gauss_pair(-1.0, 1.0);
  Partition even{Partition::Variant{PredicateRule{
      2, [](std::span<const double> r) -> std::size_t {
        return r[0] > 0.25 ? 1u : 0u;
      }}}};
  CHECK(even.assign(model, 0.0) == 0);
  CHECK(even.assign(model, 0.5) == 1);

  Partition broken{Partition::Variant{PredicateRule{
      2, [](std::span<const double>) -> std::size_t { return 9; }}}};
  CHECK_THROWS_AS((void)broken.assign(model, 0.0), property_violation);
}

} // TEST_SUITE
