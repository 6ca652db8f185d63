#include "pmnet/dataset/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pmnet/dataset/gray.hpp"
#include "pmnet/geo/map_generator.hpp"

namespace pmnet::dataset {

namespace {

struct Neighbor {
  bool found = false;
  int dist = 0;
  double value = 0.0;
};

// Nearest known RoI pixel from (x, y) stepping by (dx, dy); building and
// unknown pixels are skipped.
Neighbor nearest_known(const propagation::PathlossGrid& g, const std::vector<std::uint8_t>& known, int x, int y,
                       int dx, int dy) {
  for (int k = 1;; ++k) {
    const int xx = x + dx * k;
    const int yy = y + dy * k;
    if (xx < 0 || yy < 0 || xx >= g.width || yy >= g.height) return {};
    const auto i = g.index(xx, yy);
    if (g.roi_mask[i] && known[i]) return {true, k, g.values[i]};
  }
}

double bracket(const Neighbor& a, const Neighbor& b) {
  return (a.value * b.dist + b.value * a.dist) / static_cast<double>(a.dist + b.dist);
}

}  // namespace

std::vector<std::uint8_t> reached_mask(const propagation::PathlossGrid& grid, double floor_dbm) {
  std::vector<std::uint8_t> mask(grid.values.size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = grid.roi_mask[i] && grid.values[i] > static_cast<float>(floor_dbm) ? 1 : 0;
  return mask;
}

propagation::PathlossGrid interpolate_missing(const propagation::PathlossGrid& grid,
                                              const std::vector<std::uint8_t>& known_mask) {
  if (known_mask.size() != grid.values.size()) throw std::invalid_argument("interpolate_missing: mask size mismatch");
  std::vector<std::uint8_t> known(grid.values.size(), 0);
  std::size_t n_known = 0;
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < known.size(); ++i) {
    if (!grid.roi_mask[i]) continue;
    if (known_mask[i]) {
      known[i] = 1;
      ++n_known;
    } else {
      missing.push_back(i);
    }
  }
  if (n_known == 0) throw std::domain_error("interpolate_missing: no known RoI pixel");
  if (n_known < 4) throw std::domain_error("interpolate_missing: fewer than 4 known RoI pixels");

  propagation::PathlossGrid out = grid;
  std::vector<std::pair<std::size_t, double>> filled;
  bool one_sided = false;
  while (!missing.empty()) {
    filled.clear();
    std::vector<std::size_t> still;
    for (const auto i : missing) {
      const int x = static_cast<int>(i % grid.width);
      const int y = static_cast<int>(i / grid.width);
      const auto l = nearest_known(out, known, x, y, -1, 0);
      const auto r = nearest_known(out, known, x, y, 1, 0);
      const auto u = nearest_known(out, known, x, y, 0, -1);
      const auto d = nearest_known(out, known, x, y, 0, 1);
      double sum = 0.0;
      int count = 0;
      if (l.found && r.found) {
        sum += bracket(l, r);
        ++count;
      }
      if (u.found && d.found) {
        sum += bracket(u, d);
        ++count;
      }
      if (count == 0 && one_sided) {
        for (const auto* nb : {&l, &r, &u, &d}) {
          if (nb->found) {
            sum += nb->value;
            ++count;
          }
        }
      }
      if (count > 0)
        filled.emplace_back(i, sum / count);
      else
        still.push_back(i);
    }
    if (filled.empty()) {
      if (one_sided) throw std::logic_error("interpolate_missing: no progress");
      one_sided = true;
      continue;
    }
    // apply after the pass so the result does not depend on visiting order
    for (const auto& [i, v] : filled) {
      out.values[i] = static_cast<float>(v);
      known[i] = 1;
    }
    missing = std::move(still);
    one_sided = false;
  }
  return out;
}

int crop_count(int scene_size, geo::Pixel tx, const CropConfig& cfg) {
  int nx = 0;
  int ny = 0;
  for (int o = 0; o + cfg.crop_size <= scene_size; o += cfg.stride) {
    if (tx.x >= o && tx.x < o + cfg.crop_size) ++nx;
    if (tx.y >= o && tx.y < o + cfg.crop_size) ++ny;
  }
  return nx * ny;
}

std::vector<GraySample> crop_augment(const Scene& scene, const CropConfig& cfg) {
  if (cfg.crop_size <= 0 || cfg.output_size <= 0 || cfg.stride <= 0)
    throw std::invalid_argument("crop_augment: sizes and stride must be positive");
  const int n = scene.map.size();
  if (cfg.crop_size > n) throw std::invalid_argument("crop_augment: crop larger than scene");
  const auto& grid = scene.grid;
  const geo::Pixel tx = scene.tx.pos;
  const int out_n = cfg.output_size;
  const double scale = static_cast<double>(cfg.crop_size) / out_n;  // source px per output px

  std::vector<GraySample> samples;
  int crop_index = 0;
  for (int oy = 0; oy + cfg.crop_size <= n; oy += cfg.stride) {
    if (tx.y < oy || tx.y >= oy + cfg.crop_size) continue;
    for (int ox = 0; ox + cfg.crop_size <= n; ox += cfg.stride) {
      if (tx.x < ox || tx.x >= ox + cfg.crop_size) continue;
      GraySample s;
      s.map_channel = GrayImage(out_n, out_n);
      s.target = GrayImage(out_n, out_n, kBuildingGray);
      for (int v = 0; v < out_n; ++v) {
        const double sy = oy + (v + 0.5) * scale - 0.5;
        const int near_y = std::min(n - 1, oy + static_cast<int>((v + 0.5) * scale));
        for (int u = 0; u < out_n; ++u) {
          const double sx = ox + (u + 0.5) * scale - 0.5;
          const int near_x = std::min(n - 1, ox + static_cast<int>((u + 0.5) * scale));
          const auto cell = scene.map.at(near_x, near_y);
          s.map_channel.at(u, v) = geo::cell_to_gray(cell);
          if (cell == geo::Cell::Building) continue;
          // bilinear over RoI neighbours, renormalized
          const int x0 = static_cast<int>(std::floor(sx));
          const int y0 = static_cast<int>(std::floor(sy));
          const double fx = sx - x0;
          const double fy = sy - y0;
          double acc = 0.0;
          double wsum = 0.0;
          for (int dy = 0; dy <= 1; ++dy) {
            for (int dx = 0; dx <= 1; ++dx) {
              const int xx = std::clamp(x0 + dx, 0, n - 1);
              const int yy = std::clamp(y0 + dy, 0, n - 1);
              if (!grid.roi(xx, yy)) continue;
              const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
              acc += w * grid.at(xx, yy);
              wsum += w;
            }
          }
          const double dbm = wsum > 0.0 ? acc / wsum : grid.at(near_x, near_y);
          s.target.at(u, v) = to_gray(dbm);
        }
      }
      s.tx = {static_cast<int>((tx.x - ox + 0.5) / scale), static_cast<int>((tx.y - oy + 0.5) / scale)};
      s.tx_dilation = cfg.tx_dilation;
      s.tx_channel = make_tx_channel(out_n, s.tx, cfg.tx_dilation);
      s.scene_id = scene.scene_id;
      s.map_id = scene.map.map_id();
      s.crop_index = crop_index;
      s.aug_tag = "orig";
      s.sample_id = scene.scene_id + "_c" + std::to_string(crop_index) + "_orig";
      s.meters_per_pixel = scene.map.meters_per_pixel() * scale;
      samples.push_back(std::move(s));
      ++crop_index;
    }
  }
  return samples;
}

const char* transform_tag(Transform t) {
  switch (t) {
    case Transform::Identity:
      return "orig";
    case Transform::Rot90:
      return "rot90";
    case Transform::Rot180:
      return "rot180";
    case Transform::Rot270:
      return "rot270";
    case Transform::FlipH:
      return "flip_h";
    case Transform::FlipV:
      return "flip_v";
    case Transform::FlipD:
      return "flip_d";
  }
  return "orig";
}

geo::Pixel transform_pixel(geo::Pixel p, int n, Transform t) {
  switch (t) {
    case Transform::Identity:
      return p;
    case Transform::Rot90:
      return {n - 1 - p.y, p.x};
    case Transform::Rot180:
      return {n - 1 - p.x, n - 1 - p.y};
    case Transform::Rot270:
      return {p.y, n - 1 - p.x};
    case Transform::FlipH:
      return {n - 1 - p.x, p.y};
    case Transform::FlipV:
      return {p.x, n - 1 - p.y};
    case Transform::FlipD:
      return {p.y, p.x};
  }
  return p;
}

GrayImage transform_image(const GrayImage& img, Transform t) {
  if (img.width != img.height) throw std::invalid_argument("transform_image: image must be square");
  const int n = img.width;
  GrayImage out(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const auto q = transform_pixel({x, y}, n, t);
      out.at(q.x, q.y) = img.at(x, y);
    }
  }
  return out;
}

GraySample transform_sample(const GraySample& s, Transform t) {
  GraySample out = s;
  out.map_channel = transform_image(s.map_channel, t);
  out.tx_channel = transform_image(s.tx_channel, t);
  out.target = transform_image(s.target, t);
  out.tx = transform_pixel(s.tx, s.size(), t);
  out.aug_tag = transform_tag(t);
  out.sample_id = s.scene_id + "_c" + std::to_string(s.crop_index) + "_" + out.aug_tag;
  return out;
}

std::vector<GraySample> rotate_flip_augment(const std::vector<GraySample>& samples, AugmentMode mode) {
  std::vector<Transform> ops{Transform::Identity};
  if (mode.rotations) ops.insert(ops.end(), {Transform::Rot90, Transform::Rot180, Transform::Rot270});
  if (mode.flips) ops.insert(ops.end(), {Transform::FlipH, Transform::FlipV, Transform::FlipD});
  std::vector<GraySample> out;
  out.reserve(samples.size() * ops.size());
  for (const auto& s : samples) {
    if (s.map_channel.width != s.map_channel.height) throw std::invalid_argument("rotate_flip_augment: non-square sample");
    for (const auto t : ops) out.push_back(t == Transform::Identity ? s : transform_sample(s, t));
  }
  return out;
}

}  // namespace pmnet::dataset
