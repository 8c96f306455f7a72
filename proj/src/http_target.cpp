#include "predscale/http_target.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <httplib.h>

#include "predscale/errors.hpp"

namespace predscale {

namespace {

using Clock = std::chrono::steady_clock;

void set_timeouts(httplib::Client& client, double timeout) {
  const auto sec = static_cast<time_t>(std::floor(timeout));
  const auto usec = static_cast<time_t>((timeout - std::floor(timeout)) * 1e6);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
}

}  // namespace

HttpEndpoint parse_http_url(const std::string& url) {
  constexpr std::string_view scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw ConfigError("live target url must start with http:// (got '" + url + "')");
  }
  HttpEndpoint ep;
  auto rest = url.substr(scheme.size());
  const auto slash = rest.find('/');
  if (slash != std::string::npos) {
    ep.path = rest.substr(slash);
    rest = rest.substr(0, slash);
  }
  const auto colon = rest.rfind(':');
  if (colon != std::string::npos) {
    const auto port_text = rest.substr(colon + 1);
    int port = 0;
    try {
      port = std::stoi(port_text);
    } catch (const std::exception&) {
      throw ConfigError("bad port in url '" + url + "'");
    }
    if (port <= 0 || port > 65535) throw ConfigError("bad port in url '" + url + "'");
    ep.port = static_cast<std::uint16_t>(port);
    rest = rest.substr(0, colon);
  }
  if (rest.empty()) throw ConfigError("missing host in url '" + url + "'");
  ep.host = rest;
  return ep;
}

HttpTarget::HttpTarget(HttpTargetOptions options)
    : options_(std::move(options)), endpoint_(parse_http_url(options_.url)), start_(Clock::now()) {
  if (options_.max_connections == 0) throw ConfigError("max_connections must be >= 1");
}

double HttpTarget::now() {
  return std::chrono::duration<double>(Clock::now() - start_).count();
}

void HttpTarget::wait_until(double t) {
  const auto deadline = start_ + std::chrono::duration_cast<Clock::duration>(
                                     std::chrono::duration<double>(t));
  std::this_thread::sleep_until(deadline);
}

RequestOutcome HttpTarget::send_one(double timeout) const {
  httplib::Client client(endpoint_.host, endpoint_.port);
  set_timeouts(client, timeout);
  httplib::Headers headers(options_.headers.begin(), options_.headers.end());
  const auto t0 = Clock::now();
  auto res = client.Post(endpoint_.path, headers, options_.body, options_.content_type);
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::Read || err == httplib::Error::Write ||
                           err == httplib::Error::ConnectionTimeout || elapsed >= timeout;
    return RequestOutcome::failed(timed_out ? FailureKind::timeout : FailureKind::connection,
                                  elapsed);
  }
  if (elapsed > timeout) return RequestOutcome::failed(FailureKind::timeout, elapsed);
  if (res->status < 200 || res->status >= 300) {
    return RequestOutcome::failed(FailureKind::status, elapsed);
  }
  return RequestOutcome::success(elapsed);
}

std::vector<RequestOutcome> HttpTarget::fire(std::size_t count, double timeout) {
  std::vector<RequestOutcome> out(count);
  if (count == 0) return out;
  std::atomic<std::size_t> next{0};
  const auto workers = std::min(count, options_.max_connections);
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (auto i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        out[i] = send_one(timeout);
      }
    });
  }
  pool.clear();  // joins
  return out;
}

bool HttpTarget::probe(double timeout) const {
  httplib::Client client(endpoint_.host, endpoint_.port);
  set_timeouts(client, timeout);
  auto res = client.Get(endpoint_.path);
  return static_cast<bool>(res);
}

}  // namespace predscale
