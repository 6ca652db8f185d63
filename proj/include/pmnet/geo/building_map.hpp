#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pmnet::geo {

enum class Cell : std::uint8_t { Free = 0, Building = 1, Foliage = 2 };

/// Grid position; x is the column, y the row.
struct Pixel {
  int x = 0;
  int y = 0;
  auto operator<=>(const Pixel&) const = default;
};

/// Square rasterized scene. Each cell is FREE, BUILDING or FOLIAGE.
///
/// The region of interest (RoI) is every non-building cell. A valid map
/// has at least one FREE cell so that a transmitter can be placed.
class BuildingMap {
 public:
  BuildingMap() = default;
  BuildingMap(int size, double meters_per_pixel, std::string map_id = {});

  int size() const { return size_; }
  double meters_per_pixel() const { return meters_per_pixel_; }
  const std::string& map_id() const { return map_id_; }
  void set_map_id(std::string id) { map_id_ = std::move(id); }

  bool in_bounds(Pixel p) const { return p.x >= 0 && p.y >= 0 && p.x < size_ && p.y < size_; }
  Cell at(Pixel p) const { return cells_[index(p)]; }
  Cell at(int x, int y) const { return at(Pixel{x, y}); }
  void set(Pixel p, Cell c) { cells_[index(p)] = c; }
  void set(int x, int y, Cell c) { set(Pixel{x, y}, c); }

  bool is_building(Pixel p) const { return at(p) == Cell::Building; }
  bool is_roi(Pixel p) const { return at(p) != Cell::Building; }
  bool is_free(Pixel p) const { return at(p) == Cell::Free; }

  std::span<const Cell> cells() const { return cells_; }
  std::size_t count(Cell c) const;

  /// Fills an axis-aligned rectangle [x0, x1) x [y0, y1), clipped to the map.
  void fill_rect(int x0, int y0, int x1, int y1, Cell c);

  /// Throws std::invalid_argument if an invariant is broken.
  void validate() const;

  bool operator==(const BuildingMap&) const = default;

 private:
  std::size_t index(Pixel p) const { return static_cast<std::size_t>(p.y) * size_ + p.x; }

  int size_ = 0;
  double meters_per_pixel_ = 1.0;
  std::vector<Cell> cells_;
  std::string map_id_;
};

/// Transmitter position on the grid plus antenna height in meters.
struct TxLocation {
  Pixel pos;
  double h_bs = 10.0;
};

inline constexpr double kDefaultBsHeight = 10.0;
inline constexpr double kDefaultUtHeight = 1.5;

/// d_3d^2 == d_2d^2 + (h_bs - h_ut)^2.
struct LinkGeometry {
  double d_2d = 0.0;
  double d_3d = 0.0;
  bool los = true;
};

/// True iff no BUILDING cell lies on the supercover of the segment between
/// the two cell centers. Endpoint cells are not tested; foliage never blocks.
bool line_of_sight(const BuildingMap& map, Pixel tx, Pixel rx);

/// Every cell touched by the segment joining the two cell centers, endpoints
/// included. Passing exactly through a lattice corner touches all four cells
/// around it.
std::vector<Pixel> supercover(Pixel a, Pixel b);

LinkGeometry link_geometry(const BuildingMap& map, const TxLocation& tx, Pixel rx, double h_ut);

/// Chooses a FREE cell for a transmitter, deterministic for a fixed seed.
/// Prefers cells at least `margin` pixels from the border when possible.
TxLocation place_tx(const BuildingMap& map, std::uint64_t seed, int margin = 0, double h_bs = kDefaultBsHeight);

}  // namespace pmnet::geo
