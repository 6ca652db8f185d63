#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmnet/common/image.hpp"
#include "pmnet/geo/building_map.hpp"
#include "pmnet/model/pmnet.hpp"
#include "pmnet/propagation/models.hpp"

namespace pmnet::app {

/// Request failure carrying the HTTP status the service answers with
/// (400 bad request, 404 unknown map or model, 503 not ready).
class RequestError : public std::runtime_error {
 public:
  RequestError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

inline constexpr int kMaxInlineMapSize = 256;

struct ModelEntry {
  std::string id;
  std::string kind;  ///< "pmnet" or "baseline"
  std::filesystem::path path;
  nlohmann::json info;  ///< config and metadata for checkpoints
};

/// Checkpoints found under a directory (recursively, "*.ckpt") plus the
/// "3gpp" and "raylaunch" baselines. A checkpoint's id is its path
/// relative to the directory, without the extension. Models load lazily
/// and are then shared read-only.
class ModelRegistry {
 public:
  explicit ModelRegistry(std::optional<std::filesystem::path> dir = std::nullopt);

  const std::vector<ModelEntry>& entries() const { return entries_; }
  const ModelEntry* find(const std::string& id) const;
  /// Loaded model for a checkpoint id; throws RequestError(404) if unknown.
  std::shared_ptr<const model::PmnetModel> model(const std::string& id) const;
  void load_all() const;

  /// Checkpoint path for an id, or the argument itself when it names an
  /// existing file.
  static std::optional<std::filesystem::path> resolve_checkpoint(const std::optional<std::filesystem::path>& dir,
                                                                 const std::string& id_or_path);

 private:
  std::vector<ModelEntry> entries_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::shared_ptr<const model::PmnetModel>> loaded_;
};

struct MapInfo {
  std::string map_id;
  std::string scene_id;  ///< scene whose map file is served
  int size = 0;
  double meters_per_pixel = 1.0;
  std::vector<std::string> scene_ids;
  geo::Pixel default_tx;  ///< TX of the first scene
};

/// Read-only view of the maps under a dataset root (scenes/<id>/map.png).
class MapStore {
 public:
  MapStore() = default;
  explicit MapStore(const std::filesystem::path& root);

  const std::vector<MapInfo>& maps() const { return maps_; }
  const MapInfo* find(const std::string& map_id) const;
  /// Throws RequestError(404) for an unknown id.
  geo::BuildingMap load(const std::string& map_id) const;
  /// Map image downsampled to at most `max_size` pixels per side.
  GrayImage thumbnail(const std::string& map_id, int max_size = 64) const;

  /// Scenario propagation settings from the manifest, when present.
  const propagation::PropagationConfig& propagation() const { return prop_; }
  const propagation::RayLaunchConfig& raylaunch() const { return rl_; }

 private:
  std::filesystem::path root_;
  std::vector<MapInfo> maps_;
  propagation::PropagationConfig prop_;
  propagation::RayLaunchConfig rl_;
};

struct PredictRequest {
  std::optional<std::string> map_id;
  std::optional<GrayImage> map_image;  ///< inline map, FREE=255, BUILDING=0, FOLIAGE=128
  double meters_per_pixel = 1.0;       ///< for inline maps
  geo::Pixel tx;
  std::string model_id;
};

struct PredictResponse {
  std::string model_id;
  std::string map_id;
  geo::Pixel tx;
  GrayImage gray;  ///< 0 on predicted buildings, 1..255 (dBm + 255) elsewhere
  GrayImage roi;   ///< 255 on predicted RoI, 0 elsewhere
  double latency_ms = 0.0;
};

/// Parses {map_id | map_png (base64), meters_per_pixel, tx: [x, y] or
/// {x, y}, model_id}. Throws RequestError(400) when malformed.
PredictRequest parse_predict_request(const nlohmann::json& j);

/// The one prediction path used by both the CLI and the service.
/// Throws RequestError: 404 for unknown map or model, 400 for a TX
/// outside the map or not on a FREE cell, a bad inline map or a map size
/// the model cannot take.
PredictResponse predict(const ModelRegistry& models, const MapStore& maps, const PredictRequest& req);

/// Gray <-> dBm constants of the response grid.
nlohmann::json units_json();
/// {model_id, map_id, tx, width, height, gray_png, roi_png (base64 PNG),
/// latency_ms, units}
nlohmann::json to_json(const PredictResponse& r);

}  // namespace pmnet::app
