#include "predscale/stub_server.hpp"

#include <chrono>

#include <httplib.h>

#include "predscale/errors.hpp"

namespace predscale {

StubTargetServer::StubTargetServer(StubTargetOptions options)
    : options_(std::move(options)), server_(std::make_unique<httplib::Server>()),
      rng_(options_.seed) {
  if (options_.latency < 0.0) throw StartupError("stub target: negative latency");
  if (options_.failure_rate < 0.0 || options_.failure_rate > 1.0) {
    throw StartupError("stub target: failure_rate must be in [0, 1]");
  }
  const int threads = std::max(options_.threads, 1);
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  // The library default sets SO_REUSEPORT, which would let a second server
  // share a busy port silently.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  auto handler = [this](const httplib::Request&, httplib::Response& res) {
    const bool fail = draw_failure();
    std::this_thread::sleep_for(std::chrono::duration<double>(options_.latency));
    res.status = fail ? 500 : 200;
    res.set_content(fail ? R"({"error":"injected failure"})" : R"({"output":"hello there\n"})",
                    "application/json");
    ++served_;
  };
  server_->Post(".*", handler);
  // Reachability probes use GET; answer them without touching the RNG.
  server_->Get(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  if (options_.port == 0) {
    const int bound = server_->bind_to_any_port(options_.host);
    if (bound <= 0) throw StartupError("stub target: cannot bind " + options_.host);
    port_ = static_cast<std::uint16_t>(bound);
  } else {
    if (!server_->bind_to_port(options_.host, options_.port)) {
      throw StartupError("stub target: port " + std::to_string(options_.port) + " is unavailable");
    }
    port_ = options_.port;
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

StubTargetServer::~StubTargetServer() { shutdown(); }

bool StubTargetServer::draw_failure() {
  std::lock_guard lock(rng_mutex_);
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return u < options_.failure_rate;
}

std::string StubTargetServer::url() const {
  return "http://" + options_.host + ":" + std::to_string(port_) + "/run";
}

void StubTargetServer::shutdown() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void StubTargetServer::wait() {
  if (thread_.joinable()) thread_.join();
}

std::unique_ptr<StubTargetServer> serve_stub_target(const StubTargetOptions& options) {
  return std::make_unique<StubTargetServer>(options);
}

}  // namespace predscale
