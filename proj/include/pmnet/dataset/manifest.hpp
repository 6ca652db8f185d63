#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmnet/dataset/sample.hpp"

namespace pmnet::dataset {

enum class Split { Train, Val };

const char* split_name(Split s);
Split parse_split(const std::string& name);

/// Reference to a sample stored under the dataset root.
struct SampleRef {
  std::string sample_id;
  std::string scene_id;
  std::string map_id;
  int crop_index = 0;
  std::string aug_tag = "orig";
  std::string dir;  ///< relative to the dataset root
};

/// Sample list, map-level split assignment and the gray normalization.
struct DatasetManifest {
  std::string dataset_id;
  std::vector<SampleRef> samples;
  std::map<std::string, Split> split;  ///< map_id -> split
  double norm_min_dbm = -254.0;
  double norm_max_dbm = 0.0;
  nlohmann::json provenance = nlohmann::json::object();

  std::vector<std::string> map_ids() const;
  std::vector<SampleRef> in_split(Split s) const;
  /// Throws if a map_id is assigned to both splits or a sample's map has
  /// no assignment (when any split is set).
  void validate() const;
};

void to_json(nlohmann::json& j, const DatasetManifest& m);
void from_json(const nlohmann::json& j, DatasetManifest& m);

void save_manifest(const std::filesystem::path& root, const DatasetManifest& m);
DatasetManifest load_manifest(const std::filesystem::path& root);

/// Map-exclusive random split. The number of training maps is
/// round(train_fraction * maps), kept within [1, maps - 1].
/// Throws std::domain_error with fewer than two distinct maps.
DatasetManifest split(const DatasetManifest& manifest, double train_fraction, std::uint64_t seed);

/// Random subset of whole maps from one split holding about `fraction` of
/// that split's samples (at least one map). Used for data-fraction runs.
std::vector<SampleRef> subsample_by_map(const DatasetManifest& manifest, Split s, double fraction,
                                        std::uint64_t seed);

/// Sample directory: map.png, tx.png, target.png and meta.json.
SampleRef write_sample(const std::filesystem::path& root, const GraySample& sample);
GraySample read_sample(const std::filesystem::path& root, const SampleRef& ref);

/// Scene directory: map.png + map.json, grid.plg + grid.json, gray.png.
void write_scene(const std::filesystem::path& root, const Scene& scene, const nlohmann::json& generator_meta);
Scene read_scene(const std::filesystem::path& root, const std::string& scene_id);
std::vector<std::string> list_scenes(const std::filesystem::path& root);

}  // namespace pmnet::dataset
