#pragma once

// Live-mode target: fires real HTTP POSTs.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

#include "predscale/loadgen.hpp"

namespace predscale {

struct HttpEndpoint {
  std::string host;
  std::uint16_t port = 80;
  std::string path = "/";
};

/// Parses "http://host[:port][/path]". Only plain http is supported.
HttpEndpoint parse_http_url(const std::string& url);

struct HttpTargetOptions {
  std::string url;
  std::string body = R"json({"language":"python","code":"print(\"hello there\")"})json";
  std::string content_type = "application/json";
  std::map<std::string, std::string> headers;
  std::size_t max_connections = 1024;  ///< cap on simultaneously open requests
};

/// Success means a 2xx answer within the timeout. Time is wall clock since
/// construction.
class HttpTarget final : public Target {
 public:
  explicit HttpTarget(HttpTargetOptions options);

  double now() override;
  void wait_until(double t) override;
  std::vector<RequestOutcome> fire(std::size_t count, double timeout) override;

  /// True if something answers HTTP at the endpoint (any status).
  bool probe(double timeout = 2.0) const;

 private:
  RequestOutcome send_one(double timeout) const;

  HttpTargetOptions options_;
  HttpEndpoint endpoint_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace predscale
