#include "pmnet/geo/map_generator.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "pmnet/common/random.hpp"

namespace pmnet::geo {
namespace {

constexpr int kMaxPlacementFailures = 100;

bool region_has_building(const BuildingMap& map, int x0, int y0, int x1, int y1) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, map.size());
  y1 = std::min(y1, map.size());
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x)
      if (map.is_building({x, y})) return true;
  return false;
}

std::string default_map_id(std::uint64_t seed) {
  std::string digits = std::to_string(seed);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "map_" + digits;
}

}  // namespace

void to_json(nlohmann::json& j, const MapGenParams& p) {
  j = nlohmann::json{{"seed", p.seed},
                     {"size", p.size},
                     {"density", p.density},
                     {"block_min", p.block_min},
                     {"block_max", p.block_max},
                     {"street_width", p.street_width},
                     {"foliage_fraction", p.foliage_fraction},
                     {"meters_per_pixel", p.meters_per_pixel}};
}

void from_json(const nlohmann::json& j, MapGenParams& p) {
  p.seed = j.value("seed", p.seed);
  p.size = j.value("size", p.size);
  p.density = j.value("density", p.density);
  p.block_min = j.value("block_min", p.block_min);
  p.block_max = j.value("block_max", p.block_max);
  p.street_width = j.value("street_width", p.street_width);
  p.foliage_fraction = j.value("foliage_fraction", p.foliage_fraction);
  p.meters_per_pixel = j.value("meters_per_pixel", p.meters_per_pixel);
}

BuildingMap generate_map(const MapGenParams& params) {
  if (params.size < 32) throw std::invalid_argument("generate_map: size must be >= 32");
  if (!(params.density >= 0.0 && params.density < 1.0))
    throw std::invalid_argument("generate_map: density must be in [0, 1)");
  if (!(params.foliage_fraction >= 0.0 && params.foliage_fraction < 1.0))
    throw std::invalid_argument("generate_map: foliage_fraction must be in [0, 1)");
  if (params.block_min < 1 || params.block_max < params.block_min || params.block_max > params.size)
    throw std::invalid_argument("generate_map: invalid block size range");
  if (params.street_width < 0) throw std::invalid_argument("generate_map: street_width must be >= 0");

  BuildingMap map(params.size, params.meters_per_pixel, default_map_id(params.seed));
  Rng rng(params.seed);
  const int n = params.size;
  const double area = static_cast<double>(n) * n;

  // Blocks: rejection sampling against already-placed blocks grown by the
  // street width. Stops at the target density or after a run of failures.
  const double building_target = params.density * area;
  double built = 0.0;
  int failures = 0;
  while (built < building_target && failures < kMaxPlacementFailures) {
    const int w = static_cast<int>(rng.uniform_int(params.block_min, params.block_max));
    const int h = static_cast<int>(rng.uniform_int(params.block_min, params.block_max));
    const int x0 = static_cast<int>(rng.uniform_int(0, n - w));
    const int y0 = static_cast<int>(rng.uniform_int(0, n - h));
    const int g = params.street_width;
    if (region_has_building(map, x0 - g, y0 - g, x0 + w + g, y0 + h + g)) {
      ++failures;
      continue;
    }
    map.fill_rect(x0, y0, x0 + w, y0 + h, Cell::Building);
    built += static_cast<double>(w) * h;
    failures = 0;
  }

  if (params.foliage_fraction > 0.0) {
    const double foliage_target = params.foliage_fraction * area;
    double planted = 0.0;
    failures = 0;
    const int patch_max = std::max(3, params.block_max / 2);
    while (planted < foliage_target && failures < kMaxPlacementFailures) {
      const int w = static_cast<int>(rng.uniform_int(2, patch_max));
      const int h = static_cast<int>(rng.uniform_int(2, patch_max));
      const int x0 = static_cast<int>(rng.uniform_int(0, n - w));
      const int y0 = static_cast<int>(rng.uniform_int(0, n - h));
      int added = 0;
      for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) {
          if (map.is_free({x, y})) {
            map.set(x, y, Cell::Foliage);
            ++added;
          }
        }
      }
      if (added == 0) {
        ++failures;
      } else {
        planted += added;
        failures = 0;
      }
    }
  }

  if (map.count(Cell::Free) == 0)
    throw std::domain_error("generate_map: no FREE cell left after " + std::to_string(kMaxPlacementFailures) +
                            " placement attempts");
  return map;
}

std::uint8_t cell_to_gray(Cell c) {
  switch (c) {
    case Cell::Free:
      return kFreeGray;
    case Cell::Building:
      return kBuildingGray;
    case Cell::Foliage:
      return kFoliageGray;
  }
  return kFreeGray;
}

Cell gray_to_cell(std::uint8_t g) {
  if (g < 64) return Cell::Building;
  if (g < 192) return Cell::Foliage;
  return Cell::Free;
}

GrayImage map_to_image(const BuildingMap& map) {
  GrayImage img(map.size(), map.size());
  for (int y = 0; y < map.size(); ++y)
    for (int x = 0; x < map.size(); ++x) img.at(x, y) = cell_to_gray(map.at(x, y));
  return img;
}

BuildingMap map_from_image(const GrayImage& image, double meters_per_pixel, std::string map_id) {
  if (image.width != image.height) throw std::invalid_argument("map image must be square");
  BuildingMap map(image.width, meters_per_pixel, std::move(map_id));
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) map.set(x, y, gray_to_cell(image.at(x, y)));
  return map;
}

void write_map(const std::filesystem::path& png_path, const BuildingMap& map, const MapGenParams* params) {
  write_png(png_path, map_to_image(map));
  nlohmann::json meta{{"map_id", map.map_id()}, {"meters_per_pixel", map.meters_per_pixel()}};
  if (params) {
    meta["seed"] = params->seed;
    meta["generator_params"] = *params;
  } else {
    meta["seed"] = nullptr;
    meta["generator_params"] = nullptr;
  }
  auto sidecar = png_path;
  sidecar.replace_extension(".json");
  write_text_file(sidecar, meta.dump(2) + "\n");
}

BuildingMap read_map(const std::filesystem::path& png_path) {
  auto sidecar = png_path;
  sidecar.replace_extension(".json");
  const auto meta = nlohmann::json::parse(read_text_file(sidecar));
  auto map = map_from_image(read_png_gray(png_path), meta.at("meters_per_pixel").get<double>(),
                            meta.at("map_id").get<std::string>());
  map.validate();
  return map;
}

}  // namespace pmnet::geo
