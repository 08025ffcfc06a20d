#include "cli.hpp"

#include "glassbox/curves.hpp"
#include "glassbox/dataset.hpp"
#include "glassbox/explain.hpp"
#include "glassbox/export.hpp"
#include "glassbox/models.hpp"
#include "glassbox/service.hpp"
#include "glassbox/signatures.hpp"

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <mutex>

#include "CLI11.hpp"

namespace glassbox::cli {
namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::string data;
  std::string schema;
  std::string label = "label";
  std::string model;
  std::string out = ".";
  std::uint64_t seed = 42;

  // train
  std::string kind = "logistic";
  double lr = 0.1;
  int iters = 500;
  int max_depth = 4;
  int min_leaf = 1;
  double constant = 0.5;

  // pdp / inspect
  std::string feature;
  std::optional<Index> row;
  std::vector<std::string> overrides;
  std::string objective = "decrease";
  std::string sort = "importance";

  // signatures
  std::optional<double> tau_pos;
  std::optional<double> tau_neg;
  std::string k = "auto";
  std::string k_pos;
  std::string k_neg;

  // serve
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string cors_origin = "*";
};

void add_data_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--data", cfg.data, "CSV data file")->required();
  cmd->add_option("--schema", cfg.schema, "JSON schema with feature kinds and feasible sets");
  cmd->add_option("--label", cfg.label, "Name of the outcome column")->capture_default_str();
  cmd->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Seed for every randomized step")->capture_default_str();
}

void add_model_option(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--model", cfg.model, "Model JSON written by 'train'")->required();
}

Dataset load_data(const RunConfig& cfg) {
  Schema schema;
  if (!cfg.schema.empty()) schema = load_schema(cfg.schema);
  return impute_missing(load_csv(cfg.data, schema, cfg.label));
}

std::vector<std::string> feature_names(const Dataset& d) {
  std::vector<std::string> names;
  for (const auto& m : d.features()) names.push_back(m.name);
  return names;
}

PredictorPtr load_checked_model(const RunConfig& cfg, const Dataset& d) {
  std::vector<std::string> names;
  PredictorPtr model = load_model(cfg.model, &names);
  if (names != feature_names(d)) throw InputError("model feature names do not match the data columns");
  return model;
}

std::optional<int> parse_k(const std::string& text) {
  if (text.empty() || text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const int k = std::stoi(text, &used);
    if (used == text.size()) return k;
  } catch (const std::exception&) {
  }
  throw InputError("--k must be 'auto' or an integer, got '" + text + "'");
}

std::string safe_file_stem(std::string name) {
  for (char& c : name)
    if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
  return name;
}

void write_run_manifest(const RunConfig& cfg, const std::string& command) {
  Json doc = {{"command", command}, {"seed", cfg.seed}, {"data", cfg.data}, {"schema", cfg.schema},
              {"label", cfg.label}, {"model", cfg.model}};
  write_text(fs::path(cfg.out) / "run.json", doc.dump(2) + "\n");
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  const Dataset d = load_data(cfg);
  PredictorPtr model;
  if (cfg.kind == "logistic") {
    model = std::make_shared<LogisticModel>(train_logistic(d, cfg.lr, cfg.iters));
  } else if (cfg.kind == "tree") {
    model = std::make_shared<TreeModel>(train_tree(d, cfg.max_depth, cfg.min_leaf));
  } else if (cfg.kind == "constant") {
    model = std::make_shared<ConstantModel>(d.n_features(), cfg.constant);
  } else {
    throw InputError("unknown model kind '" + cfg.kind + "'");
  }
  const fs::path path = fs::path(cfg.out) / "model.json";
  save_model(path, *model, feature_names(d), cfg.seed);

  const VectorXd scores = model->predict_batch(d.values());
  std::int64_t correct = 0;
  for (Index i = 0; i < d.n_rows(); ++i)
    correct += (scores(i) >= 0.5 ? 1 : 0) == d.labels()[static_cast<std::size_t>(i)] ? 1 : 0;
  const CurveSet cs = score_curves(d.labels(), {scores.data(), static_cast<std::size_t>(scores.size())},
                                   /*allow_single_class=*/true);
  out << "model: " << model->descriptor() << "\n";
  out << "accuracy: " << format_double(static_cast<double>(correct) / static_cast<double>(d.n_rows())) << "\n";
  out << "auc: " << (cs.roc_defined ? format_double(cs.auc) : std::string("undefined")) << "\n";
  out << "wrote " << path.string() << "\n";
  write_run_manifest(cfg, "train");
  return kOk;
}

int cmd_pdp(const RunConfig& cfg, std::ostream& out) {
  const Dataset d = load_data(cfg);
  const PredictorPtr model = load_checked_model(cfg, d);
  const int f = d.feature_index(cfg.feature);
  const PdpCurve curve = partial_dependence(*model, d, f);
  const std::string stem = "pdp_" + safe_file_stem(cfg.feature);
  const fs::path curve_path = fs::path(cfg.out) / (stem + ".csv");
  const fs::path hist_path = fs::path(cfg.out) / (stem + "_histogram.csv");
  write_text(curve_path, curve_csv(curve.grid, curve.values, "pdp"));
  write_text(hist_path, histogram_csv(curve.histogram));
  write_run_manifest(cfg, "pdp");
  out << "wrote " << curve_path.string() << " and " << hist_path.string() << "\n";
  return kOk;
}

int cmd_inspect(const RunConfig& cfg, std::ostream& out) {
  const Dataset d = load_data(cfg);
  const PredictorPtr model = load_checked_model(cfg, d);
  const Index row = cfg.row.value_or(0);
  if (row < 0 || row >= d.n_rows())
    throw InputError("row " + std::to_string(row) + " out of range [0, " + std::to_string(d.n_rows()) + ")");
  std::map<std::string, double> overrides;
  for (const auto& kv : cfg.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("--set expects name=value, got '" + kv + "'");
    const std::string name = kv.substr(0, eq);
    const std::string text = kv.substr(eq + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      overrides[name] = v;
    } catch (const std::exception&) {
      throw InputError("--set value for '" + name + "' is not a number: '" + text + "'");
    }
  }
  InspectionReport report =
      inspect(*model, d, d.row(row), overrides, parse_objective(cfg.objective), parse_sort_order(cfg.sort));
  report.row = row;
  Json doc = inspection_to_json(report, d);
  doc["seed"] = cfg.seed;
  const fs::path path = fs::path(cfg.out) / "inspect.json";
  write_text(path, doc.dump(2) + "\n");
  write_run_manifest(cfg, "inspect");
  out << "score: " << format_double(report.evaluated.score) << "\n";
  out << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_signatures(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.tau_pos || !cfg.tau_neg) throw InputError("--tau-pos and --tau-neg are required");
  const ThresholdPair tp{*cfg.tau_pos, *cfg.tau_neg};
  if (tp.tau_pos < tp.tau_neg) throw InputError("--tau-pos must be >= --tau-neg");
  const Dataset d = load_data(cfg);
  const PredictorPtr model = load_checked_model(cfg, d);
  const auto k_pos = parse_k(cfg.k_pos.empty() ? cfg.k : cfg.k_pos);
  const auto k_neg = parse_k(cfg.k_neg.empty() ? cfg.k : cfg.k_neg);
  const SignatureMatrix sig = build_signatures(d, *model, tp, k_pos, k_neg, cfg.seed);
  const fs::path path = fs::path(cfg.out) / "signatures.json";
  write_text(path, signatures_to_json(sig).dump(2) + "\n");
  write_run_manifest(cfg, "signatures");
  out << "clusters: " << sig.k_pos << " positive, " << sig.k_neg << " negative\n";
  out << "wrote " << path.string() << "\n";
  return kOk;
}

std::atomic<service::Server*> g_server{nullptr};

void handle_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

int cmd_serve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.port < 1 || cfg.port > 65535) {
    err << "error: port " << cfg.port << " is outside [1, 65535]\n";
    return kUsageError;
  }
  const Dataset d = load_data(cfg);
  const PredictorPtr model = load_checked_model(cfg, d);
  const auto session = service::make_session(d, model, cfg.seed, cfg.cors_origin);
  std::mutex log_mutex;
  service::Server server(session, [&](const std::string& line) {
    std::lock_guard lock(log_mutex);
    err << line << std::endl;
  });
  if (!server.bind(cfg.host, cfg.port)) {
    err << "error: cannot bind " << cfg.host << ":" << cfg.port << " (port busy?)\n";
    return kUsageError;
  }
  out << "serving on http://" << cfg.host << ":" << server.port() << service::kApiPrefix << std::endl;
  g_server.store(&server);
  auto prev_int = std::signal(SIGINT, handle_signal);
  auto prev_term = std::signal(SIGTERM, handle_signal);
  server.run();
  std::signal(SIGINT, prev_int);
  std::signal(SIGTERM, prev_term);
  g_server.store(nullptr);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"glassbox: black-box model inspection", "glassbox"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* train = app.add_subcommand("train", "Train a model and report training accuracy and AUC");
  add_data_options(train, cfg);
  train->add_option("--kind", cfg.kind, "logistic | tree | constant")->capture_default_str();
  train->add_option("--lr", cfg.lr, "Logistic learning rate")->capture_default_str();
  train->add_option("--iters", cfg.iters, "Logistic gradient steps")->capture_default_str();
  train->add_option("--max-depth", cfg.max_depth, "Tree depth limit")->capture_default_str();
  train->add_option("--min-leaf", cfg.min_leaf, "Minimum rows per tree leaf")->capture_default_str();
  train->add_option("--value", cfg.constant, "Score of a constant model")->capture_default_str();

  auto* pdp = app.add_subcommand("pdp", "Write a partial dependence curve and histogram");
  add_data_options(pdp, cfg);
  add_model_option(pdp, cfg);
  pdp->add_option("--feature", cfg.feature, "Feature to sweep")->required();

  auto* insp = app.add_subcommand("inspect", "Local importance and impactful changes for one row");
  add_data_options(insp, cfg);
  add_model_option(insp, cfg);
  insp->add_option("--row", cfg.row, "Row index used as the anchor (default 0)");
  insp->add_option("--set", cfg.overrides, "Override a feature value: name=value (repeatable)");
  insp->add_option("--objective", cfg.objective, "increase | decrease")->capture_default_str();
  insp->add_option("--sort", cfg.sort, "importance | impact | index | weight")->capture_default_str();

  auto* sig = app.add_subcommand("signatures", "Contrast, cluster and rank strong-signal items");
  add_data_options(sig, cfg);
  add_model_option(sig, cfg);
  sig->add_option("--tau-pos", cfg.tau_pos, "Positive threshold")->required();
  sig->add_option("--tau-neg", cfg.tau_neg, "Negative threshold")->required();
  sig->add_option("--k", cfg.k, "Clusters per side: auto | integer")->capture_default_str();
  sig->add_option("--k-pos", cfg.k_pos, "Overrides --k for the positive side");
  sig->add_option("--k-neg", cfg.k_neg, "Overrides --k for the negative side");

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API for one dataset and model");
  add_data_options(serve, cfg);
  add_model_option(serve, cfg);
  serve->add_option("--port", cfg.port, "TCP port")->capture_default_str();
  serve->add_option("--host", cfg.host, "Bind address")->capture_default_str();
  serve->add_option("--cors-origin", cfg.cors_origin, "Allowed CORS origin")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (train->parsed()) return cmd_train(cfg, out);
    if (pdp->parsed()) return cmd_pdp(cfg, out);
    if (insp->parsed()) return cmd_inspect(cfg, out);
    if (sig->parsed()) return cmd_signatures(cfg, out);
    if (serve->parsed()) return cmd_serve(cfg, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kUsageError;
}

}  // namespace glassbox::cli
