#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "arena/gateway.hpp"
#include "arena/ingest.hpp"
#include "arena/leaderboard.hpp"
#include "arena/pipeline.hpp"

namespace arena {

struct ServerOptions {
  std::string host = "127.0.0.1";
  /// 0 picks a free port.
  int port = 8080;
  /// Enables `/v1/admin/*` when set; presented as `X-Admin-Token`.
  std::optional<std::string> admin_token;
  int requests_per_minute = 600;
  /// Zero disables the background tick scheduler.
  Seconds tick_interval{300};
  std::filesystem::path config_dir;
};

/// HTTP+JSON API over the gateway, leaderboard and pipeline, plus the tick
/// scheduler. All components are borrowed.
class ApiServer {
 public:
  ApiServer(RegistryHandle &registry, Store &store, Gateway &gateway, Ingestor &ingest, Pipeline &pipeline,
            ServerOptions options, Clock clock = system_now);
  ~ApiServer();
  ApiServer(const ApiServer &) = delete;
  ApiServer &operator=(const ApiServer &) = delete;

  /// Throws Error(Io) when the address cannot be bound. Returns the bound port.
  int bind();
  /// Blocks until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace arena
