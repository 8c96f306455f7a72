#pragma once

// Minimal stand-in for the service under test in live mode: answers every
// POST after a fixed delay, failing a seeded random subset with HTTP 500.

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace predscale {

struct StubTargetOptions {
  double latency = 0.05;
  double failure_rate = 0.0;
  std::uint16_t port = 0;  ///< 0 picks a free port
  std::uint64_t seed = 0;
  std::string host = "127.0.0.1";
  int threads = 64;
};

class StubTargetServer {
 public:
  /// Binds and starts serving. StartupError if the port cannot be bound.
  explicit StubTargetServer(StubTargetOptions options);
  ~StubTargetServer();

  StubTargetServer(const StubTargetServer&) = delete;
  StubTargetServer& operator=(const StubTargetServer&) = delete;

  std::uint16_t port() const { return port_; }
  std::string url() const;
  std::uint64_t requests_served() const { return served_.load(); }

  /// Stops accepting and joins the server thread. Idempotent.
  void shutdown();
  /// Blocks until shutdown() is called from elsewhere.
  void wait();

 private:
  bool draw_failure();

  StubTargetOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::uint16_t port_ = 0;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
  std::atomic<std::uint64_t> served_{0};
};

std::unique_ptr<StubTargetServer> serve_stub_target(const StubTargetOptions& options);

}  // namespace predscale
