#pragma once

#include "glassbox/dataset.hpp"
#include "glassbox/models.hpp"

#include <map>
#include <string>
#include <vector>

namespace glassbox {

/// Global partial dependence of one feature.
struct PdpCurve {
  int feature = 0;
  std::vector<double> grid;
  std::vector<double> values;
  Histogram histogram;
};

/// Prediction of a single anchor row as one feature is swept.
struct IceCurve {
  int feature = 0;
  VectorXd anchor;
  std::vector<double> grid;
  std::vector<double> values;
  double anchor_score = 0.0;
};

struct LocalImportanceReport {
  VectorXd anchor;
  double anchor_score = 0.0;
  std::vector<double> importance;
  std::vector<double> bandwidth;
};

enum class Objective { kIncrease, kDecrease };

const char* to_string(Objective objective);
Objective parse_objective(const std::string& text);

struct ImpactfulChange {
  int feature = 0;
  double current_value = 0.0;
  double suggested_value = 0.0;
  double delta = 0.0;  // pred(changed) - pred(anchor)
  Objective direction = Objective::kDecrease;
};

struct WhatIfResult {
  VectorXd evaluated;
  double score = 0.0;
};

/// Average prediction over all rows with column f overwritten by v. The
/// dataset is only read.
double pdp_at(const Predictor& model, const Dataset& d, Index f, double v);

/// pdp_at over sweep_grid(d, f), plus the data histogram of the column.
PdpCurve partial_dependence(const Predictor& model, const Dataset& d, Index f);

IceCurve ice_curve(const Predictor& model, const Eigen::Ref<const VectorXd>& anchor, Index f,
                   const std::vector<double>& grid);

/// Gaussian-weighted mean absolute deviation of the ICE curve from the
/// anchor score:
///
///   imp_f = sum_j w_j |ice_f(v_j) - pred(anchor)| / sum_j w_j
///   w_j   = exp(-(v_j - anchor_f)^2 / (2 sigma_f^2)),  sigma_f = max(std_f, 1e-9)
///
/// Binary features weight both values equally. Depends only on single-feature
/// sweeps, never on model internals.
LocalImportanceReport local_importance(const Predictor& model, const Dataset& d,
                                       const Eigen::Ref<const VectorXd>& anchor);

/// Best single-feature substitution per feature, sorted by |delta|
/// descending (ties by feature index). Within a feature, ties on the
/// objective go to the value closest to the current one, then the smaller.
std::vector<ImpactfulChange> impactful_changes(const Predictor& model, const Dataset& d,
                                               const Eigen::Ref<const VectorXd>& anchor,
                                               Objective objective);

/// Applies overrides by feature name, snapping each to the nearest feasible
/// value, and scores the result.
WhatIfResult what_if(const Predictor& model, const Eigen::Ref<const VectorXd>& anchor,
                     const std::map<std::string, double>& overrides,
                     const std::vector<FeatureMeta>& features);

enum class SortOrder { kImportance, kImpact, kIndex, kModelWeight };

const char* to_string(SortOrder order);
SortOrder parse_sort_order(const std::string& text);

/// |w_f| * std_f for a logistic model; empty for any other predictor.
std::vector<double> model_weight_relevance(const Predictor& model, const Dataset& d);

/// Feature display order for a sort mode. Descending by the chosen measure,
/// ties by feature index. kModelWeight falls back to index order when the
/// model offers no weights.
std::vector<int> feature_order(SortOrder order, const LocalImportanceReport& importance,
                               const std::vector<ImpactfulChange>& changes,
                               const std::vector<double>& model_weights = {});

}  // namespace glassbox
