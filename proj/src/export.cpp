#include "glassbox/export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace glassbox {
namespace {

std::vector<std::string> names_of(const Dataset& d) {
  std::vector<std::string> names;
  for (const auto& m : d.features()) names.push_back(m.name);
  return names;
}

template <typename T>
T require(const Json& doc, const char* key) {
  if (!doc.contains(key)) throw InputError(std::string("model document lacks '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("model document field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json model_to_json(const Predictor& model, const std::vector<std::string>& feature_names) {
  Json doc;
  if (const auto* lm = dynamic_cast<const LogisticModel*>(&model)) {
    doc["kind"] = "logistic";
    doc["feature_names"] = feature_names;
    doc["weights"] = std::vector<double>(lm->weights().data(), lm->weights().data() + lm->weights().size());
    doc["bias"] = lm->bias();
    doc["learning_rate"] = lm->config().learning_rate;
    doc["iterations"] = lm->config().iterations;
  } else if (const auto* tm = dynamic_cast<const TreeModel*>(&model)) {
    doc["kind"] = "tree";
    doc["feature_names"] = feature_names;
    doc["max_depth"] = tm->max_depth();
    doc["min_leaf"] = tm->min_leaf();
    Json nodes = Json::array();
    for (const auto& node : tm->nodes()) {
      if (node.is_leaf()) {
        nodes.push_back({{"leaf", node.value}});
      } else {
        nodes.push_back({{"feature", node.feature},
                         {"threshold", node.threshold},
                         {"left", node.left},
                         {"right", node.right},
                         {"value", node.value}});
      }
    }
    doc["nodes"] = std::move(nodes);
  } else if (const auto* cm = dynamic_cast<const ConstantModel*>(&model)) {
    doc["kind"] = "constant";
    doc["feature_names"] = feature_names;
    doc["value"] = cm->value();
  } else {
    throw InputError("model '" + model.descriptor() + "' cannot be serialized");
  }
  return doc;
}

PredictorPtr model_from_json(const Json& doc, std::vector<std::string>* feature_names) {
  if (!doc.is_object()) throw InputError("model document must be a JSON object");
  const auto kind = require<std::string>(doc, "kind");
  const auto names = require<std::vector<std::string>>(doc, "feature_names");
  if (feature_names != nullptr) *feature_names = names;
  const auto nf = static_cast<Index>(names.size());
  if (kind == "logistic") {
    const auto w = require<std::vector<double>>(doc, "weights");
    if (static_cast<Index>(w.size()) != nf) throw InputError("weights and feature_names differ in length");
    LogisticConfig cfg;
    cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
    cfg.iterations = doc.value("iterations", cfg.iterations);
    return std::make_shared<LogisticModel>(Eigen::Map<const VectorXd>(w.data(), nf), require<double>(doc, "bias"),
                                           cfg);
  }
  if (kind == "tree") {
    std::vector<TreeModel::Node> nodes;
    for (const auto& j : require<Json>(doc, "nodes")) {
      TreeModel::Node node;
      if (j.contains("leaf")) {
        node.value = require<double>(j, "leaf");
      } else {
        node.feature = require<int>(j, "feature");
        node.threshold = require<double>(j, "threshold");
        node.left = require<int>(j, "left");
        node.right = require<int>(j, "right");
        node.value = j.value("value", 0.0);
        if (node.feature < 0) throw InputError("tree node has a negative feature index");
      }
      nodes.push_back(node);
    }
    return std::make_shared<TreeModel>(nf, std::move(nodes), doc.value("max_depth", 0), doc.value("min_leaf", 1));
  }
  if (kind == "constant") return std::make_shared<ConstantModel>(nf, require<double>(doc, "value"));
  throw InputError("unknown model kind '" + kind + "'");
}

void save_model(const std::filesystem::path& path, const Predictor& model,
                const std::vector<std::string>& feature_names, std::uint64_t seed) {
  Json doc = model_to_json(model, feature_names);
  doc["seed"] = seed;
  write_text(path, doc.dump(2) + "\n");
}

PredictorPtr load_model(const std::filesystem::path& path, std::vector<std::string>* feature_names) {
  std::ifstream in(path);
  if (!in) throw InputError("model file not found: " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  return model_from_json(doc, feature_names);
}

std::string curve_csv(const std::vector<double>& grid, const std::vector<double>& values,
                      const std::string& value_column) {
  std::string out = "grid_value," + value_column + "\n";
  for (std::size_t j = 0; j < grid.size(); ++j) out += format_double(grid[j]) + "," + format_double(values[j]) + "\n";
  return out;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    out += format_double(h.bin_lo(b)) + "," + format_double(h.bin_hi(b)) + "," + std::to_string(h.counts[b]) + "\n";
  return out;
}

Json histogram_to_json(const Histogram& h) {
  Json bins = Json::array();
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    bins.push_back({{"lo", h.bin_lo(b)}, {"hi", h.bin_hi(b)}, {"count", h.counts[b]}});
  return {{"feature", h.feature}, {"categorical", h.categorical}, {"bin_edges", h.bin_edges}, {"bins", bins}};
}

Json pdp_to_json(const PdpCurve& curve, const Dataset& d) {
  return {{"feature", d.feature(curve.feature).name},
          {"index", curve.feature},
          {"grid", curve.grid},
          {"values", curve.values},
          {"histogram", histogram_to_json(curve.histogram)}};
}

Json curves_to_json(const CurveSet& cs) {
  Json auc = cs.roc_defined ? Json(cs.auc) : Json(nullptr);
  return {{"thresholds", cs.thresholds}, {"tpr", cs.tpr},
          {"fpr", cs.fpr},               {"precision", cs.precision},
          {"recall", cs.recall},         {"accuracy", cs.accuracy},
          {"tp", cs.tp},                 {"fp", cs.fp},
          {"positives", cs.positives},   {"negatives", cs.negatives},
          {"auc", auc}};
}

Json contingency_to_json(const ContingencyMatrix& m, double threshold) {
  return {{"threshold", threshold}, {"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}};
}

Json signatures_to_json(const SignatureMatrix& sig) {
  Json clusters = Json::array();
  for (const auto& c : sig.clusters) {
    std::vector<double> absence;
    for (double p : c.presence) absence.push_back(1.0 - p);
    clusters.push_back({{"side", to_string(c.side)},
                        {"members", c.members},
                        {"presence", c.presence},
                        {"absence", absence},
                        {"label_mix", c.label_mix}});
  }
  Json disc = Json::array();
  for (Index c = 0; c < sig.discriminativeness.rows(); ++c) {
    Json row = Json::array();
    for (Index f = 0; f < sig.discriminativeness.cols(); ++f) row.push_back(sig.discriminativeness(c, f));
    disc.push_back(std::move(row));
  }
  Json projection = Json::array();
  for (Index i = 0; i < sig.projection.rows(); ++i) projection.push_back({sig.projection(i, 0), sig.projection(i, 1)});
  return {{"clusters", clusters},
          {"discriminativeness", disc},
          {"projection", projection},
          {"projected_items", sig.projected_items},
          {"k_pos", sig.k_pos},
          {"k_neg", sig.k_neg},
          {"thresholds", {{"tau_pos", sig.thresholds.tau_pos}, {"tau_neg", sig.thresholds.tau_neg}}},
          {"seed", sig.seed}};
}

Json feasible_to_json(const FeasibleSet& fs) {
  if (fs.is_interval()) return Json::array({fs.interval->first, fs.interval->second});
  return {{"values", fs.values}};
}

Json meta_to_json(const Dataset& d, const Predictor& model) {
  Json features = Json::array();
  for (const auto& m : d.features()) {
    Json f = {{"name", m.name},
              {"index", m.index},
              {"kind", to_string(m.kind)},
              {"observed_min", m.observed_min},
              {"observed_max", m.observed_max},
              {"grid_size", m.grid_size},
              {"feasible", m.feasible ? feasible_to_json(*m.feasible) : Json(nullptr)}};
    const auto& imputed = d.imputed_values()[static_cast<std::size_t>(m.index)];
    f["imputed_value"] = imputed ? Json(*imputed) : Json(nullptr);
    features.push_back(std::move(f));
  }
  return {{"n_rows", d.n_rows()}, {"features", features}, {"model", model.descriptor()}};
}

InspectionReport inspect(const Predictor& model, const Dataset& d, const Eigen::Ref<const VectorXd>& anchor,
                         const std::map<std::string, double>& overrides, Objective objective, SortOrder order) {
  InspectionReport r;
  r.evaluated = what_if(model, anchor, overrides, d.features());
  r.importance = local_importance(model, d, r.evaluated.evaluated);
  r.changes = impactful_changes(model, d, r.evaluated.evaluated, objective);
  r.objective = objective;
  r.order = order;
  r.feature_order = feature_order(order, r.importance, r.changes, model_weight_relevance(model, d));
  return r;
}

Json inspection_to_json(const InspectionReport& report, const Dataset& d) {
  const auto names = names_of(d);
  Json evaluated = Json::array();
  Json importance = Json::object();
  Json features = Json::array();
  for (Index f = 0; f < d.n_features(); ++f) {
    const auto fs = static_cast<std::size_t>(f);
    evaluated.push_back(report.evaluated.evaluated(f));
    importance[names[fs]] = report.importance.importance[fs];
    features.push_back({{"name", names[fs]},
                        {"value", report.evaluated.evaluated(f)},
                        {"importance", report.importance.importance[fs]},
                        {"bandwidth", report.importance.bandwidth[fs]}});
  }
  Json impactful = Json::array();
  for (const auto& c : report.changes)
    impactful.push_back({{"feature", names[static_cast<std::size_t>(c.feature)]},
                         {"index", c.feature},
                         {"current_value", c.current_value},
                         {"suggested_value", c.suggested_value},
                         {"delta", c.delta},
                         {"direction", to_string(c.direction)}});
  Json order = Json::array();
  for (int f : report.feature_order) order.push_back(names[static_cast<std::size_t>(f)]);
  Json doc;
  doc["row"] = report.row ? Json(*report.row) : Json(nullptr);
  doc["evaluated"] = evaluated;
  doc["score"] = report.evaluated.score;
  doc["importance"] = importance;
  doc["impactful"] = impactful;
  doc["objective"] = to_string(report.objective);
  doc["sort_order"] = to_string(report.order);
  doc["order"] = order;
  doc["features"] = features;
  return doc;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path.string());
  out << text;
  if (!out) throw Error("failed writing file: " + path.string());
}

}  // namespace glassbox
