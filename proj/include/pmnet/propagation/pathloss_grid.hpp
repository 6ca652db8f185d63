#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmnet/geo/building_map.hpp"

namespace pmnet::propagation {

/// Lowest representable received power; the gray conversion maps it to 1.
inline constexpr double kFloorDbm = -254.0;

/// Per-pixel received power in dBm (equal to path gain in dB when the
/// transmit power is 0 dBm) with the region-of-interest mask.
///
/// roi_mask is 1 on RoI pixels and 0 on building pixels. Values on
/// non-RoI pixels are meaningless and kept at the floor.
struct PathlossGrid {
  int width = 0;
  int height = 0;
  std::vector<float> values;
  std::vector<std::uint8_t> roi_mask;
  std::string map_id;
  geo::Pixel tx;

  PathlossGrid() = default;
  PathlossGrid(int w, int h, float fill = static_cast<float>(kFloorDbm))
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill),
        roi_mask(static_cast<std::size_t>(w) * h, 1) {}

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  float& at(int x, int y) { return values[index(x, y)]; }
  float at(int x, int y) const { return values[index(x, y)]; }
  bool roi(int x, int y) const { return roi_mask[index(x, y)] != 0; }

  bool operator==(const PathlossGrid&) const = default;
};

/// Empty grid shaped like the map, RoI mask taken from its building cells.
PathlossGrid make_grid_for(const geo::BuildingMap& map, const geo::TxLocation& tx);

/// Binary grid file: "PLG1", int32 width, int32 height (little endian),
/// float32 values row-major, then one mask byte per pixel. The JSON
/// metadata goes to a sidecar with the same stem.
void write_grid(const std::filesystem::path& path, const PathlossGrid& grid, const nlohmann::json& metadata);
PathlossGrid read_grid(const std::filesystem::path& path);

}  // namespace pmnet::propagation
