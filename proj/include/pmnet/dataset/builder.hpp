#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmnet/dataset/manifest.hpp"
#include "pmnet/dataset/preprocess.hpp"
#include "pmnet/geo/map_generator.hpp"
#include "pmnet/propagation/models.hpp"

namespace pmnet::dataset {

/// Everything needed to regenerate a family of scenes.
struct ScenarioConfig {
  std::string name = "scenario";
  std::string generator = "raylaunch";  ///< "raylaunch" or "3gpp"
  int n_maps = 50;
  int tx_per_map = 1;                   ///< scenes per map, each with its own TX
  std::uint64_t seed = 1;
  geo::MapGenParams map;                ///< seed field is overridden per map
  double density_jitter = 0.05;         ///< per-map density drawn from density +/- jitter
  int tx_margin = 4;
  propagation::PropagationConfig propagation;
  propagation::RayLaunchConfig raylaunch;
  double rx_dropout = 0.0;              ///< fraction of RoI receivers reported missing
};

void to_json(nlohmann::json& j, const ScenarioConfig& c);
void from_json(const nlohmann::json& j, ScenarioConfig& c);

/// Named presets. "urban_a": medium density, 1.7 m/px, no foliage.
/// "urban_b": denser, larger blocks, 0.85 m/px, foliage. Both 128 px.
/// "city_256": 256 px scenes at 0.86 m/px for the full-size profile.
ScenarioConfig scenario_preset(const std::string& name);

int scene_count(const ScenarioConfig& cfg);

/// Ground truth for one TX: "3gpp" (UMi with map LoS) or "raylaunch"
/// (ray launcher, unreached receivers infilled). Known pixels may be
/// thinned further with `known`; null means "all reached pixels".
propagation::PathlossGrid simulate(const std::string& generator, const geo::BuildingMap& map,
                                   const geo::TxLocation& tx, const propagation::PropagationConfig& prop,
                                   const propagation::RayLaunchConfig& rl,
                                   const std::vector<std::uint8_t>* known = nullptr);

/// Map `map_index` of the scenario, id "<name>_m<index>". Deterministic.
geo::BuildingMap generate_scenario_map(const ScenarioConfig& cfg, int map_index);

/// Scene `index` of the scenario (map index / tx_per_map). Deterministic.
///
/// Unreached and dropped-out receivers are filled by interpolate_missing
/// in dBm before anything is gray converted.
Scene generate_scene(const ScenarioConfig& cfg, int index);

std::vector<Scene> generate_scenes(const ScenarioConfig& cfg);

struct PreprocessConfig {
  bool crop = false;  ///< false: one full-scene sample per scene
  CropConfig crop_cfg;
  AugmentMode augment{false, false};
  int tx_dilation = 0;
};

void to_json(nlohmann::json& j, const PreprocessConfig& c);
void from_json(const nlohmann::json& j, PreprocessConfig& c);

std::vector<GraySample> preprocess_scene(const Scene& scene, const PreprocessConfig& cfg);

/// In-memory list of samples.
struct SampleSet {
  std::vector<GraySample> samples;
};

/// Split an in-memory sample list with the same map-exclusive rule as the
/// manifest split.
struct SplitSets {
  SampleSet train;
  SampleSet val;
};
SplitSets split_samples(const std::vector<GraySample>& samples, double train_fraction, std::uint64_t seed);

/// Whole-map subset holding about `fraction` of the samples.
SampleSet subsample(const SampleSet& set, double fraction, std::uint64_t seed);

/// Writes scenes, samples and manifest.json under root. Returns the
/// manifest (already split with train_fraction).
DatasetManifest build_dataset(const std::filesystem::path& root, const ScenarioConfig& scenario,
                              const PreprocessConfig& prep, double train_fraction, std::uint64_t split_seed);

/// Re-runs preprocessing over the scenes already under root, replacing the
/// samples and the manifest.
DatasetManifest rebuild_samples(const std::filesystem::path& root, const PreprocessConfig& prep,
                                double train_fraction, std::uint64_t split_seed);

SampleSet load_split(const std::filesystem::path& root, const DatasetManifest& manifest, Split s);

}  // namespace pmnet::dataset
