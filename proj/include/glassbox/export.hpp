#pragma once

#include "glassbox/curves.hpp"
#include "glassbox/dataset.hpp"
#include "glassbox/explain.hpp"
#include "glassbox/models.hpp"
#include "glassbox/signatures.hpp"

#include <filesystem>
#include <string>

#include "json.hpp"

namespace glassbox {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form of v.
std::string format_double(double v);

// Model documents:
//   {"kind": "logistic", "feature_names": [...], "weights": [...], "bias": b,
//    "learning_rate": lr, "iterations": n}
//   {"kind": "tree", "feature_names": [...], "max_depth": d, "min_leaf": m,
//    "nodes": [{"feature": f, "threshold": t, "left": l, "right": r, "value": v}
//              | {"leaf": v}]}
//   {"kind": "constant", "feature_names": [...], "value": v}
Json model_to_json(const Predictor& model, const std::vector<std::string>& feature_names);
PredictorPtr model_from_json(const Json& doc, std::vector<std::string>* feature_names = nullptr);
void save_model(const std::filesystem::path& path, const Predictor& model,
                const std::vector<std::string>& feature_names, std::uint64_t seed);
PredictorPtr load_model(const std::filesystem::path& path, std::vector<std::string>* feature_names = nullptr);

/// "grid_value,<value_column>" rows, ascending grid.
std::string curve_csv(const std::vector<double>& grid, const std::vector<double>& values,
                      const std::string& value_column = "pdp");
/// "bin_lo,bin_hi,count" rows; binary features use bin_lo == bin_hi.
std::string histogram_csv(const Histogram& h);

Json histogram_to_json(const Histogram& h);
Json pdp_to_json(const PdpCurve& curve, const Dataset& d);
Json curves_to_json(const CurveSet& cs);
Json contingency_to_json(const ContingencyMatrix& m, double threshold);
Json signatures_to_json(const SignatureMatrix& sig);
Json meta_to_json(const Dataset& d, const Predictor& model);
Json feasible_to_json(const FeasibleSet& fs);

struct InspectionReport {
  std::optional<Index> row;
  WhatIfResult evaluated;
  LocalImportanceReport importance;
  std::vector<ImpactfulChange> changes;
  Objective objective = Objective::kDecrease;
  SortOrder order = SortOrder::kImportance;
  std::vector<int> feature_order;
};

/// score + local importance + impactful changes for one evaluated vector.
InspectionReport inspect(const Predictor& model, const Dataset& d, const Eigen::Ref<const VectorXd>& anchor,
                         const std::map<std::string, double>& overrides, Objective objective, SortOrder order);

Json inspection_to_json(const InspectionReport& report, const Dataset& d);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace glassbox
