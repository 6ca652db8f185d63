#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "pmnet/app/predict.hpp"

namespace pmnet::app {

struct ServiceConfig {
  std::optional<std::filesystem::path> dataset_root;  ///< maps served by GET /maps
  std::optional<std::filesystem::path> registry;      ///< checkpoint directory
  int threads = 4;
  /// Extra wait before loading starts; lets tests observe the 503 state.
  std::chrono::milliseconds load_delay{0};
};

/// Environment fallbacks: PMNET_DATASET_ROOT and PMNET_REGISTRY fill the
/// fields left empty.
ServiceConfig with_env_defaults(ServiceConfig cfg);

/// HTTP inference service.
///
///   POST /predict   JSON request (see parse_predict_request), or a raw
///                   image/png map with ?tx=x,y&model_id=..&meters_per_pixel=..
///                   ?format=png (or Accept: image/png) answers with the
///                   gray PNG bytes only.
///   GET  /maps      [{map_id, size, meters_per_pixel, scenes, default_tx, thumbnail_png}]
///   GET  /maps/<id>.png
///   GET  /models    registry entries
///   GET  /healthz   {"status": "ok" | "loading" | "error"}
///
/// Maps and models load on a background thread; until then every endpoint
/// except /healthz answers 503. Nothing on disk is modified.
class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to host:port (0 picks a free port) and returns the port.
  int bind(const std::string& host, int port);
  /// Serves on the bound socket until stop().
  void run();
  void stop();

  /// Blocks until loading finished; false if it failed.
  bool wait_loaded();
  bool ready() const { return state_ == State::Ready; }
  std::string load_error() const;

 private:
  enum class State { Loading, Ready, Failed };
  struct Impl;

  ServiceConfig cfg_;
  std::unique_ptr<Impl> impl_;
  std::atomic<State> state_{State::Loading};
  std::thread loader_;
};

}  // namespace pmnet::app
