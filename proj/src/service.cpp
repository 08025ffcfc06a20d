#include "glassbox/service.hpp"

#include "glassbox/curves.hpp"
#include "glassbox/export.hpp"
#include "glassbox/signatures.hpp"

#include <cmath>

#include "httplib.h"

namespace glassbox::service {
namespace {

Response json_response(int status, const Json& body) { return {status, body.dump()}; }

Response error_response(int status, const std::string& message) {
  return json_response(status, Json{{"error", message}});
}

std::span<const int> label_span(const Session& s) { return s.data.labels(); }

std::span<const double> score_span(const Session& s) {
  return {s.scores.data(), static_cast<std::size_t>(s.scores.size())};
}

Json parse_body(const Request& req) {
  if (req.body.empty()) return Json::object();
  Json body = Json::parse(req.body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded() || !body.is_object()) throw InputError("request body must be a JSON object");
  return body;
}

std::optional<int> parse_k(const Json& body, const char* key) {
  if (!body.contains(key) || body[key].is_null()) return std::nullopt;
  const Json& v = body[key];
  if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
  if (v.is_number_integer()) return v.get<int>();
  throw InputError(std::string(key) + " must be an integer or \"auto\"");
}

double number_field(const Json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_number()) throw InputError(std::string(key) + " must be a number");
  const double v = body[key].get<double>();
  if (!std::isfinite(v)) throw InputError(std::string(key) + " must be finite");
  return v;
}

Response whatif(const Session& s, const Request& req) {
  const Json body = parse_body(req);
  Index row = 0;
  if (body.contains("row")) {
    if (!body["row"].is_number_integer()) throw InputError("row must be an integer");
    row = body["row"].get<Index>();
    if (row < 0 || row >= s.data.n_rows()) throw InputError("row " + std::to_string(row) + " out of range");
  }
  std::map<std::string, double> overrides;
  if (body.contains("values")) {
    if (!body["values"].is_object()) throw InputError("values must be an object of feature -> number");
    for (const auto& [name, v] : body["values"].items()) {
      if (!s.data.find_feature(name)) throw InputError("unknown feature: " + name);
      if (!v.is_number()) throw InputError("value for '" + name + "' must be a number");
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw InputError("value for '" + name + "' is not finite");
      overrides[name] = x;
    }
  }
  const Objective objective = parse_objective(body.value("objective", std::string("decrease")));
  const SortOrder order = parse_sort_order(body.value("sort", std::string("importance")));
  InspectionReport report = inspect(*s.model, s.data, s.data.row(row), overrides, objective, order);
  report.row = row;
  return json_response(200, inspection_to_json(report, s.data));
}

Response signatures(const Session& s, const Request& req) {
  const Json body = parse_body(req);
  ThresholdPair tp{number_field(body, "tau_pos"), number_field(body, "tau_neg")};
  if (tp.tau_pos < tp.tau_neg) throw InputError("tau_pos must be >= tau_neg");
  try {
    const auto sig = build_signatures(s.data, *s.model, tp, parse_k(body, "k_pos"), parse_k(body, "k_neg"), s.seed);
    return json_response(200, signatures_to_json(sig));
  } catch (const EmptySideError& e) {
    return error_response(409, e.what());
  }
}

Response route(const Session& s, const Request& req) {
  if (req.path.rfind(kApiPrefix, 0) != 0) return error_response(404, "not found: " + req.path);
  const std::string path = req.path.substr(std::string(kApiPrefix).size());

  if (req.method == "GET") {
    if (path == "/health") return json_response(200, Json{{"status", "ok"}});
    if (path == "/meta") return json_response(200, meta_to_json(s.data, *s.model));
    if (path.rfind("/pdp/", 0) == 0) {
      const auto f = s.data.find_feature(path.substr(5));
      if (!f) return error_response(404, "unknown feature: " + path.substr(5));
      return json_response(200, pdp_to_json(s.pdp[static_cast<std::size_t>(*f)], s.data));
    }
    if (path == "/curves") {
      try {
        return json_response(200, curves_to_json(score_curves(label_span(s), score_span(s))));
      } catch (const RocUndefinedError& e) {
        return error_response(400, e.what());
      }
    }
    if (path == "/contingency") {
      const auto it = req.query.find("t");
      if (it == req.query.end()) throw InputError("query parameter t is required");
      double t = 0.0;
      try {
        std::size_t used = 0;
        t = std::stod(it->second, &used);
        if (used != it->second.size()) throw InputError("");
      } catch (const std::exception&) {
        throw InputError("t must be a number");
      }
      if (std::isnan(t)) throw InputError("t must be a number");
      return json_response(200, contingency_to_json(contingency_at(label_span(s), score_span(s), t), t));
    }
  } else if (req.method == "POST") {
    if (path == "/whatif") return whatif(s, req);
    if (path == "/signatures") return signatures(s, req);
  }
  return error_response(404, "no route for " + req.method + " " + req.path);
}

}  // namespace

std::shared_ptr<const Session> make_session(Dataset data, PredictorPtr model, std::uint64_t seed,
                                            std::string cors_origin) {
  if (!model) throw InputError("session needs a model");
  if (data.has_missing()) throw InputError("session needs an imputed dataset");
  if (model->n_features() != data.n_features())
    throw InputError("model expects " + std::to_string(model->n_features()) + " features, data has " +
                     std::to_string(data.n_features()));
  auto s = std::make_shared<Session>(Session{std::move(data), std::move(model), {}, {}, seed, std::move(cors_origin)});
  for (Index f = 0; f < s->data.n_features(); ++f) s->pdp.push_back(partial_dependence(*s->model, s->data, f));
  s->scores = s->model->predict_batch(s->data.values());
  return s;
}

Response handle(const Session& session, const Request& request) {
  try {
    return route(session, request);
  } catch (const InputError& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

struct Server::Impl {
  httplib::Server http;
  std::shared_ptr<const Session> session;
  std::function<void(const std::string&)> log;
};

Server::Server(std::shared_ptr<const Session> session, std::function<void(const std::string&)> log)
    : impl_(std::make_unique<Impl>()) {
  impl_->session = std::move(session);
  impl_->log = std::move(log);
  auto& http = impl_->http;
  // SO_REUSEADDR only, so binding a busy port fails.
  http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  const std::string origin = impl_->session->cors_origin;
  http.set_default_headers({{"Access-Control-Allow-Origin", origin},
                            {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                            {"Access-Control-Allow-Headers", "Content-Type"}});
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    Request r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    const Response out = handle(*impl_->session, r);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  http.Get(".*", dispatch);
  http.Post(".*", dispatch);
  http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  if (impl_->log) {
    http.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
      impl_->log(req.method + " " + req.path + " " + std::to_string(res.status));
    });
  }
}

Server::~Server() { stop(); }

bool Server::bind(const std::string& host, int port) {
  if (port < 0 || port > 65535) return false;
  if (port == 0) {
    port_ = impl_->http.bind_to_any_port(host);
    return port_ > 0;
  }
  if (!impl_->http.bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

void Server::run() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_) impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace glassbox::service
