#include "glassbox/explain.hpp"

#include <cmath>
#include <numeric>

namespace glassbox {
namespace {

void check_anchor(const Predictor& model, const Eigen::Ref<const VectorXd>& anchor) {
  if (anchor.size() != model.n_features())
    throw InputError("anchor has length " + std::to_string(anchor.size()) + ", model expects " +
                     std::to_string(model.n_features()));
  if (!anchor.allFinite()) throw InputError("anchor contains non-finite values");
}

void check_feature(const Dataset& d, Index f) {
  if (f < 0 || f >= d.n_features()) throw InputError("feature index " + std::to_string(f) + " out of range");
}

}  // namespace

const char* to_string(Objective objective) {
  return objective == Objective::kIncrease ? "increase" : "decrease";
}

Objective parse_objective(const std::string& text) {
  if (text == "increase") return Objective::kIncrease;
  if (text == "decrease") return Objective::kDecrease;
  throw InputError("objective must be 'increase' or 'decrease', got '" + text + "'");
}

const char* to_string(SortOrder order) {
  switch (order) {
    case SortOrder::kImportance: return "importance";
    case SortOrder::kImpact: return "impact";
    case SortOrder::kIndex: return "index";
    case SortOrder::kModelWeight: return "weight";
  }
  return "index";
}

SortOrder parse_sort_order(const std::string& text) {
  if (text == "importance") return SortOrder::kImportance;
  if (text == "impact" || text == "impactful") return SortOrder::kImpact;
  if (text == "index") return SortOrder::kIndex;
  if (text == "weight") return SortOrder::kModelWeight;
  throw InputError("unknown sort order '" + text + "'");
}

double pdp_at(const Predictor& model, const Dataset& d, Index f, double v) {
  check_feature(d, f);
  if (d.has_missing()) throw InputError("partial dependence requires an imputed dataset");
  RowMatrixXd probe = d.values();
  probe.col(f).setConstant(v);
  return pairwise_mean(model.predict_batch(probe));
}

PdpCurve partial_dependence(const Predictor& model, const Dataset& d, Index f) {
  check_feature(d, f);
  PdpCurve curve;
  curve.feature = static_cast<int>(f);
  curve.grid = sweep_grid(d, f);
  curve.values.reserve(curve.grid.size());
  for (double v : curve.grid) curve.values.push_back(pdp_at(model, d, f, v));
  curve.histogram = histogram(d, f, static_cast<int>(curve.grid.size()));
  return curve;
}

IceCurve ice_curve(const Predictor& model, const Eigen::Ref<const VectorXd>& anchor, Index f,
                   const std::vector<double>& grid) {
  check_anchor(model, anchor);
  if (f < 0 || f >= anchor.size()) throw InputError("feature index " + std::to_string(f) + " out of range");
  IceCurve curve;
  curve.feature = static_cast<int>(f);
  curve.anchor = anchor;
  curve.grid = grid;
  curve.anchor_score = model.predict(anchor);
  RowMatrixXd probe = anchor.transpose().replicate(static_cast<Index>(grid.size()), 1);
  for (std::size_t j = 0; j < grid.size(); ++j) probe(static_cast<Index>(j), f) = grid[j];
  const VectorXd scores = model.predict_batch(probe);
  curve.values.assign(scores.data(), scores.data() + scores.size());
  return curve;
}

LocalImportanceReport local_importance(const Predictor& model, const Dataset& d,
                                       const Eigen::Ref<const VectorXd>& anchor) {
  check_anchor(model, anchor);
  LocalImportanceReport report;
  report.anchor = anchor;
  report.anchor_score = model.predict(anchor);
  for (Index f = 0; f < d.n_features(); ++f) {
    const IceCurve ice = ice_curve(model, anchor, f, sweep_grid(d, f));
    const double sigma = std::max(column_std(d, f), 1e-9);
    const bool uniform = d.feature(f).is_binary();
    VectorXd weights(static_cast<Index>(ice.grid.size()));
    VectorXd weighted(weights.size());
    for (std::size_t j = 0; j < ice.grid.size(); ++j) {
      const double dv = ice.grid[j] - anchor(f);
      const double w = uniform ? 1.0 : std::exp(-(dv * dv) / (2.0 * sigma * sigma));
      weights(static_cast<Index>(j)) = w;
      weighted(static_cast<Index>(j)) = w * std::abs(ice.values[j] - report.anchor_score);
    }
    const double wsum = pairwise_sum(weights.data(), static_cast<std::size_t>(weights.size()));
    // All weights underflow only when the anchor sits far outside the grid.
    const double imp = wsum > 0 ? pairwise_sum(weighted.data(), static_cast<std::size_t>(weighted.size())) / wsum
                                : 0.0;
    report.importance.push_back(imp);
    report.bandwidth.push_back(sigma);
  }
  return report;
}

std::vector<ImpactfulChange> impactful_changes(const Predictor& model, const Dataset& d,
                                               const Eigen::Ref<const VectorXd>& anchor,
                                               Objective objective) {
  check_anchor(model, anchor);
  const double sign = objective == Objective::kIncrease ? 1.0 : -1.0;
  std::vector<ImpactfulChange> changes;
  for (Index f = 0; f < d.n_features(); ++f) {
    const IceCurve ice = ice_curve(model, anchor, f, sweep_grid(d, f));
    const double current = anchor(f);
    std::size_t best = 0;
    for (std::size_t j = 1; j < ice.grid.size(); ++j) {
      const double gain = sign * (ice.values[j] - ice.anchor_score);
      const double best_gain = sign * (ice.values[best] - ice.anchor_score);
      if (gain > best_gain) {
        best = j;
      } else if (gain == best_gain) {
        const double dist = std::abs(ice.grid[j] - current);
        const double best_dist = std::abs(ice.grid[best] - current);
        // Grid is ascending, so an equal distance never beats the earlier (smaller) value.
        if (dist < best_dist) best = j;
      }
    }
    ImpactfulChange change;
    change.feature = static_cast<int>(f);
    change.current_value = current;
    change.suggested_value = ice.grid[best];
    change.delta = ice.values[best] - ice.anchor_score;
    change.direction = change.delta > 0   ? Objective::kIncrease
                       : change.delta < 0 ? Objective::kDecrease
                                          : objective;
    changes.push_back(change);
  }
  std::stable_sort(changes.begin(), changes.end(), [](const ImpactfulChange& a, const ImpactfulChange& b) {
    return std::abs(a.delta) > std::abs(b.delta);
  });
  return changes;
}

WhatIfResult what_if(const Predictor& model, const Eigen::Ref<const VectorXd>& anchor,
                     const std::map<std::string, double>& overrides,
                     const std::vector<FeatureMeta>& features) {
  check_anchor(model, anchor);
  if (static_cast<Index>(features.size()) != anchor.size())
    throw InputError("feature list does not match the anchor length");
  WhatIfResult result;
  result.evaluated = anchor;
  for (const auto& [name, value] : overrides) {
    const auto it = std::find_if(features.begin(), features.end(),
                                 [&](const FeatureMeta& m) { return m.name == name; });
    if (it == features.end()) throw InputError("unknown feature: " + name);
    if (!std::isfinite(value)) throw InputError("value for '" + name + "' is not finite");
    result.evaluated(it - features.begin()) = snap_to_feasible(*it, value);
  }
  result.score = model.predict(result.evaluated);
  return result;
}

std::vector<double> model_weight_relevance(const Predictor& model, const Dataset& d) {
  const auto* logistic = dynamic_cast<const LogisticModel*>(&model);
  if (logistic == nullptr) return {};
  std::vector<double> out;
  for (Index f = 0; f < d.n_features(); ++f) out.push_back(std::abs(logistic->weights()(f)) * column_std(d, f));
  return out;
}

std::vector<int> feature_order(SortOrder order, const LocalImportanceReport& importance,
                               const std::vector<ImpactfulChange>& changes,
                               const std::vector<double>& model_weights) {
  const std::size_t nf = importance.importance.size();
  std::vector<int> idx(nf);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> key(nf, 0.0);
  switch (order) {
    case SortOrder::kIndex:
      return idx;
    case SortOrder::kImportance:
      key = importance.importance;
      break;
    case SortOrder::kImpact:
      for (const auto& c : changes) key[static_cast<std::size_t>(c.feature)] = std::abs(c.delta);
      break;
    case SortOrder::kModelWeight:
      if (model_weights.size() != nf) return idx;
      key = model_weights;
      break;
  }
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return key[static_cast<std::size_t>(a)] > key[static_cast<std::size_t>(b)];
  });
  return idx;
}

}  // namespace glassbox
