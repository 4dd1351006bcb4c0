#include "rhomax/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rhomax {

namespace {
constexpr double neg_inf = -std::numeric_limits<double>::infinity();
}

Partition::Partition(Variant v) : v_(std::move(v)) {
  if (const auto* rt = std::get_if<RatioThreshold>(&v_)) {
    if (!(rt->t >= 0.0) || !std::isfinite(rt->t))
      throw config_error("ratio threshold must be finite and >= 0");
    if (rt->boundary_to > 1)
      throw config_error("ratio boundary assignment must be class 0 or 1");
  } else if (const auto* cp = std::get_if<CutPoints1D>(&v_)) {
    if (cp->cuts.empty()) throw config_error("cut-point rules need at least one cut");
    for (std::size_t i = 0; i < cp->cuts.size(); ++i) {
      if (!std::isfinite(cp->cuts[i])) throw config_error("cuts must be finite");
      if (i > 0 && !(cp->cuts[i] > cp->cuts[i - 1]))
        throw config_error("cuts must be strictly increasing");
    }
    if (!cp->order.empty()) {
      if (cp->order.size() != cp->cuts.size() + 1)
        throw config_error("cut order must have one entry per interval");
      std::vector<std::size_t> seen(cp->order.size(), 0);
      for (std::size_t k : cp->order) {
        if (k >= cp->order.size() || seen[k]++)
          throw config_error("cut order must be a permutation of the classes");
      }
    }
  } else if (const auto* bayes = std::get_if<BayesRule>(&v_)) {
    if (bayes->q.size() < 2) throw config_error("Bayes rules need >= 2 prevalences");
    double sum = 0.0;
    for (double qi : bayes->q) {
      if (!(qi >= 0.0) || !std::isfinite(qi))
        throw config_error("Bayes prevalences must be >= 0");
      sum += qi;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
      throw config_error("Bayes prevalences must sum to 1");
  } else if (const auto* bs = std::get_if<BoundarySplitThreshold>(&v_)) {
    if (!(bs->t >= 0.0) || !std::isfinite(bs->t))
      throw config_error("ratio threshold must be finite and >= 0");
    for (const auto& iv : bs->to_first)
      if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
        throw config_error("boundary intervals must satisfy lo <= hi");
  } else if (const auto* pr = std::get_if<PredicateRule>(&v_)) {
    if (pr->classes < 2 || !pr->fn)
      throw config_error("predicate rules need >= 2 classes and a callable");
  }
}

std::size_t Partition::cells() const {
  if (std::holds_alternative<RatioThreshold>(v_) ||
      std::holds_alternative<BoundarySplitThreshold>(v_))
    return 2;
  if (const auto* cp = std::get_if<CutPoints1D>(&v_)) return cp->cuts.size() + 1;
  if (const auto* bayes = std::get_if<BayesRule>(&v_)) return bayes->q.size();
  return std::get<PredicateRule>(v_).classes;
}

void Partition::validate_for(const ClassModel& model) const {
  if (cells() != model.size())
    throw config_error("partition cell count does not match the class count");
  const bool needs_1d = std::holds_alternative<CutPoints1D>(v_) ||
                        std::holds_alternative<BoundarySplitThreshold>(v_);
  if (needs_1d && model.dim() != 1)
    throw config_error("this partition kind requires one-dimensional data");
  if (std::holds_alternative<RatioThreshold>(v_) ||
      std::holds_alternative<BoundarySplitThreshold>(v_) ||
      std::holds_alternative<BayesRule>(v_)) {
    for (std::size_t k = 0; k < model.size(); ++k)
      if (!model.density(k).evaluable())
        throw config_error(
            "density-ratio partitions require evaluable class densities");
  }
}

int ratio_compare(const Density& p1, const Density& p2, double t,
                  std::span<const double> r) {
  const double l1 = p1.log_eval(r);
  if (t == 0.0) return l1 > neg_inf ? 1 : 0;
  const double l2 = p2.log_eval(r);
  if (l1 == neg_inf && l2 == neg_inf) return 0;
  if (l1 == neg_inf) return -1;
  if (l2 == neg_inf) return 1;
  const double rhs = l2 + std::log(t);
  if (l1 > rhs) return 1;
  if (l1 < rhs) return -1;
  return 0;
}

int ratio_compare(const Density& p1, const Density& p2, double t, double x) {
  return ratio_compare(p1, p2, t, std::span<const double>(&x, 1));
}

std::size_t Partition::assign(const ClassModel& model,
                              std::span<const double> r) const {
  if (const auto* rt = std::get_if<RatioThreshold>(&v_)) {
    const int c = ratio_compare(model.density(0), model.density(1), rt->t, r);
    if (c > 0) return 0;
    if (c < 0) return 1;
    return rt->boundary_to;
  }
  if (const auto* cp = std::get_if<CutPoints1D>(&v_)) {
    const std::size_t i =
        std::lower_bound(cp->cuts.begin(), cp->cuts.end(), r[0]) -
        cp->cuts.begin();
    return cp->order.empty() ? i : cp->order[i];
  }
  if (const auto* bayes = std::get_if<BayesRule>(&v_)) {
    std::size_t best = 0;
    double best_score = neg_inf;
    for (std::size_t k = 0; k < bayes->q.size(); ++k) {
      if (bayes->q[k] <= 0.0) continue;
      const double score = std::log(bayes->q[k]) + model.density(k).log_eval(r);
      if (score > best_score) {
        best_score = score;
        best = k;
      }
    }
    return best;
  }
  if (const auto* bs = std::get_if<BoundarySplitThreshold>(&v_)) {
    const int c = ratio_compare(model.density(0), model.density(1), bs->t, r);
    if (c > 0) return 0;
    if (c < 0) return 1;
    for (const auto& iv : bs->to_first)
      if (r[0] >= iv.lo && r[0] <= iv.hi) return 0;
    return 1;
  }
  const auto& pr = std::get<PredicateRule>(v_);
  const std::size_t k = pr.fn(r);
  if (k >= pr.classes)
    throw property_violation("predicate returned an out-of-range class");
  (void)model;
  return k;
}

std::size_t Partition::assign(const ClassModel& model, double x) const {
  return assign(model, std::span<const double>(&x, 1));
}

Partition bayes_partition(const ClassModel& model, std::span<const double> q) {
  if (q.size() != model.size())
    throw config_error("prevalence length does not match the class count");
  BayesRule rule;
  rule.q.assign(q.begin(), q.end());
  Partition part{Partition::Variant{std::move(rule)}};
  part.validate_for(model);
  return part;
}

} // namespace rhomax
