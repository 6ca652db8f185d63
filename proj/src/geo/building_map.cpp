#include "pmnet/geo/building_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "pmnet/common/random.hpp"

namespace pmnet::geo {

BuildingMap::BuildingMap(int size, double meters_per_pixel, std::string map_id)
    : size_(size), meters_per_pixel_(meters_per_pixel), map_id_(std::move(map_id)) {
  if (size <= 0) throw std::invalid_argument("BuildingMap: size must be positive");
  if (!(meters_per_pixel > 0.0)) throw std::invalid_argument("BuildingMap: meters_per_pixel must be > 0");
  cells_.assign(static_cast<std::size_t>(size) * size, Cell::Free);
}

std::size_t BuildingMap::count(Cell c) const { return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), c)); }

void BuildingMap::fill_rect(int x0, int y0, int x1, int y1, Cell c) {
  x0 = std::clamp(x0, 0, size_);
  x1 = std::clamp(x1, 0, size_);
  y0 = std::clamp(y0, 0, size_);
  y1 = std::clamp(y1, 0, size_);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) cells_[index({x, y})] = c;
}

void BuildingMap::validate() const {
  if (size_ <= 0 || cells_.size() != static_cast<std::size_t>(size_) * size_)
    throw std::invalid_argument("BuildingMap: inconsistent dimensions");
  if (!(meters_per_pixel_ > 0.0)) throw std::invalid_argument("BuildingMap: meters_per_pixel must be > 0");
  if (count(Cell::Free) == 0) throw std::invalid_argument("BuildingMap: no FREE cell");
}

namespace {

// Walks the supercover of a -> b, calling visit(Pixel) for each cell in
// order. Stops early when visit returns false. Returns false iff stopped.
//
// Crossing number ix of a vertical grid line happens at parameter
// (ix + 1/2) / nx along the segment, and likewise for horizontal lines, so
// comparing (2ix+1)*ny with (2iy+1)*nx orders the crossings exactly.
template <typename Visit>
bool walk_supercover(Pixel a, Pixel b, Visit&& visit) {
  const int nx = std::abs(b.x - a.x);
  const int ny = std::abs(b.y - a.y);
  const int sx = b.x > a.x ? 1 : -1;
  const int sy = b.y > a.y ? 1 : -1;
  int x = a.x;
  int y = a.y;
  if (!visit(Pixel{x, y})) return false;
  long long ix = 0;
  long long iy = 0;
  while (ix < nx || iy < ny) {
    const long long d = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
    if (d == 0) {
      // exact corner: both side cells are touched
      if (!visit(Pixel{x + sx, y})) return false;
      if (!visit(Pixel{x, y + sy})) return false;
      x += sx;
      y += sy;
      ++ix;
      ++iy;
    } else if (d < 0) {
      x += sx;
      ++ix;
    } else {
      y += sy;
      ++iy;
    }
    if (!visit(Pixel{x, y})) return false;
  }
  return true;
}

}  // namespace

std::vector<Pixel> supercover(Pixel a, Pixel b) {
  std::vector<Pixel> cells;
  walk_supercover(a, b, [&](Pixel p) {
    cells.push_back(p);
    return true;
  });
  return cells;
}

bool line_of_sight(const BuildingMap& map, Pixel tx, Pixel rx) {
  if (!map.in_bounds(tx) || !map.in_bounds(rx)) throw std::out_of_range("line_of_sight: pixel out of bounds");
  if (tx == rx) return true;
  return walk_supercover(tx, rx, [&](Pixel p) {
    if (p == tx || p == rx) return true;
    return !map.is_building(p);
  });
}

LinkGeometry link_geometry(const BuildingMap& map, const TxLocation& tx, Pixel rx, double h_ut) {
  if (!map.in_bounds(tx.pos) || !map.in_bounds(rx)) throw std::out_of_range("link_geometry: pixel out of bounds");
  const double dx = rx.x - tx.pos.x;
  const double dy = rx.y - tx.pos.y;
  LinkGeometry g;
  g.d_2d = std::hypot(dx, dy) * map.meters_per_pixel();
  const double dh = tx.h_bs - h_ut;
  g.d_3d = std::sqrt(g.d_2d * g.d_2d + dh * dh);
  g.los = line_of_sight(map, tx.pos, rx);
  return g;
}

TxLocation place_tx(const BuildingMap& map, std::uint64_t seed, int margin, double h_bs) {
  std::vector<Pixel> inner;
  std::vector<Pixel> any;
  for (int y = 0; y < map.size(); ++y) {
    for (int x = 0; x < map.size(); ++x) {
      if (!map.is_free({x, y})) continue;
      any.push_back({x, y});
      if (x >= margin && y >= margin && x < map.size() - margin && y < map.size() - margin) inner.push_back({x, y});
    }
  }
  const auto& pool = inner.empty() ? any : inner;
  if (pool.empty()) throw std::domain_error("place_tx: map has no FREE cell");
  Rng rng(mix_seed(seed, 0x7478));
  const auto k = rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1);
  return TxLocation{pool[static_cast<std::size_t>(k)], h_bs};
}

}  // namespace pmnet::geo
