#pragma once

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "pmnet/common/image.hpp"
#include "pmnet/geo/building_map.hpp"

namespace pmnet::geo {

/// Procedural urban scene: rectangular blocks separated by streets, with
/// optional foliage patches on open ground.
struct MapGenParams {
  std::uint64_t seed = 0;
  int size = 128;
  double density = 0.3;         ///< target BUILDING fraction, [0, 1)
  int block_min = 6;            ///< block side range in pixels
  int block_max = 20;
  int street_width = 2;         ///< minimum FREE gap between blocks
  double foliage_fraction = 0.0;
  double meters_per_pixel = 0.86;
};

void to_json(nlohmann::json& j, const MapGenParams& p);
void from_json(const nlohmann::json& j, MapGenParams& p);

/// Deterministic for a fixed parameter set, on any platform.
///
/// Throws std::invalid_argument for out-of-range parameters and
/// std::domain_error when the placement leaves no FREE cell.
BuildingMap generate_map(const MapGenParams& params);

inline constexpr std::uint8_t kFreeGray = 255;
inline constexpr std::uint8_t kBuildingGray = 0;
inline constexpr std::uint8_t kFoliageGray = 128;

std::uint8_t cell_to_gray(Cell c);
/// Nearest of {0, 128, 255}.
Cell gray_to_cell(std::uint8_t g);

GrayImage map_to_image(const BuildingMap& map);
BuildingMap map_from_image(const GrayImage& image, double meters_per_pixel, std::string map_id);

/// Map file: 8-bit PNG (FREE=255, BUILDING=0, FOLIAGE=128) plus a JSON
/// sidecar next to it (same stem, .json) with map_id, meters_per_pixel,
/// seed and generator_params.
void write_map(const std::filesystem::path& png_path, const BuildingMap& map, const MapGenParams* params = nullptr);
BuildingMap read_map(const std::filesystem::path& png_path);

}  // namespace pmnet::geo
