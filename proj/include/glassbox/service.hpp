#pragma once

#include "glassbox/dataset.hpp"
#include "glassbox/explain.hpp"
#include "glassbox/models.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace glassbox::service {

/// Everything a request handler may read. Built once at startup and never
/// mutated afterwards, so handlers share it without locking.
struct Session {
  Dataset data;
  PredictorPtr model;
  std::vector<PdpCurve> pdp;  // one per feature
  VectorXd scores;            // model scores of every row
  std::uint64_t seed = 42;
  std::string cors_origin = "*";
};

/// Imputes nothing: expects an already imputed dataset.
std::shared_ptr<const Session> make_session(Dataset data, PredictorPtr model, std::uint64_t seed,
                                            std::string cors_origin = "*");

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
};

inline constexpr const char* kApiPrefix = "/api/v1";

/// Routes one request. Pure function of (session, request).
Response handle(const Session& session, const Request& request);

/// Blocking HTTP/1.1 server over handle().
class Server {
 public:
  explicit Server(std::shared_ptr<const Session> session, std::function<void(const std::string&)> log = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// False when the port cannot be bound. Port 0 picks a free port.
  bool bind(const std::string& host, int port);
  int port() const { return port_; }
  /// Serves until stop() is called.
  void run();
  void stop();
  /// Blocks until run() is accepting connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = -1;
};

}  // namespace glassbox::service
