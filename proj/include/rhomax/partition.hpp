#pragma once

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "rhomax/density.hpp"

namespace rhomax {

// Binary likelihood-ratio rule at level t >= 0: class 0 where p1 > t*p2,
// class 1 where p1 < t*p2; the tie set {p1 == t*p2} goes to boundary_to.
struct RatioThreshold {
  double t = 1.0;
  std::size_t boundary_to = 0;
};

// One-dimensional cells from increasing cut points; the i-th interval
// (closed on the right at its cut) maps to class order[i].  An empty order
// means the identity mapping.
struct CutPoints1D {
  std::vector<double> cuts;
  std::vector<std::size_t> order;
};

// Maximum-a-posteriori rule under prevalence q; ties to the lowest index.
struct BayesRule {
  std::vector<double> q;
};

struct Interval {
  double lo = 0.0, hi = 0.0;
};

// Ratio rule at level t whose tie set is carved explicitly: tie points
// inside `to_first` belong to class 0, all other tie points to class 1.
// Produced by the water-level solver when the tie set has positive mass.
struct BoundarySplitThreshold {
  double t = 1.0;
  std::vector<Interval> to_first;
};

// Arbitrary measurable assignment; escape hatch for custom rules.
struct PredicateRule {
  std::size_t classes = 2;
  std::function<std::size_t(std::span<const double>)> fn;
};

class Partition {
public:
  using Variant = std::variant<RatioThreshold, CutPoints1D, BayesRule,
                               BoundarySplitThreshold, PredicateRule>;

  explicit Partition(Variant v);

  // Throws config_error if the rule cannot partition for this model
  // (wrong class count, wrong dimension, malformed order/q).
  void validate_for(const ClassModel& model) const;

  // Number of cells the rule induces (independent of any model).
  std::size_t cells() const;

  std::size_t assign(const ClassModel& model, std::span<const double> r) const;
  std::size_t assign(const ClassModel& model, double x) const;

  const Variant& raw() const { return v_; }
  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }

private:
  Variant v_;
};

// Sign of p1(r) - t*p2(r), computed through log densities so that extreme
// tails never under- or overflow: +1 inside the ratio region of class 0,
// -1 inside class 1's, 0 on the tie set.
int ratio_compare(const Density& p1, const Density& p2, double t,
                  std::span<const double> r);
int ratio_compare(const Density& p1, const Density& p2, double t, double x);

// MAP rule for the given prevalence as an explicit partition.
Partition bayes_partition(const ClassModel& model, std::span<const double> q);

} // namespace rhomax
