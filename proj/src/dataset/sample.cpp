#include "pmnet/dataset/sample.hpp"

#include <algorithm>
#include <stdexcept>

#include "pmnet/dataset/gray.hpp"
#include "pmnet/geo/map_generator.hpp"

namespace pmnet::dataset {

GrayImage make_tx_channel(int size, geo::Pixel tx, int dilation_radius) {
  GrayImage img(size, size, 0);
  for (int y = std::max(0, tx.y - dilation_radius); y <= std::min(size - 1, tx.y + dilation_radius); ++y)
    for (int x = std::max(0, tx.x - dilation_radius); x <= std::min(size - 1, tx.x + dilation_radius); ++x)
      img.at(x, y) = 255;
  return img;
}

GrayImage grid_to_gray(const propagation::PathlossGrid& grid) {
  GrayImage img(grid.width, grid.height, kBuildingGray);
  for (std::size_t i = 0; i < grid.values.size(); ++i)
    if (grid.roi_mask[i]) img.pixels[i] = to_gray(grid.values[i]);
  return img;
}

GraySample make_sample(const Scene& scene, int tx_dilation) {
  GraySample s;
  s.map_channel = geo::map_to_image(scene.map);
  s.tx_channel = make_tx_channel(scene.map.size(), scene.tx.pos, tx_dilation);
  s.target = grid_to_gray(scene.grid);
  s.scene_id = scene.scene_id;
  s.map_id = scene.map.map_id();
  s.sample_id = scene.scene_id + "_c0_orig";
  s.tx = scene.tx.pos;
  s.meters_per_pixel = scene.map.meters_per_pixel();
  s.tx_dilation = tx_dilation;
  return s;
}

void check_sample(const GraySample& s) {
  const int n = s.map_channel.width;
  auto same_shape = [n](const GrayImage& g) { return g.width == n && g.height == n; };
  if (n <= 0 || !same_shape(s.map_channel) || !same_shape(s.tx_channel) || !same_shape(s.target))
    throw std::invalid_argument("sample " + s.sample_id + ": channel shapes differ or are not square");
  if (s.tx.x < 0 || s.tx.y < 0 || s.tx.x >= n || s.tx.y >= n || s.tx_channel.at(s.tx.x, s.tx.y) != 255)
    throw std::invalid_argument("sample " + s.sample_id + ": TX channel does not mark the TX position");
  const auto marked = std::count(s.tx_channel.pixels.begin(), s.tx_channel.pixels.end(), std::uint8_t{255});
  if (s.tx_dilation == 0 && marked != 1)
    throw std::invalid_argument("sample " + s.sample_id + ": TX channel must hold exactly one TX pixel");
  if (s.map_channel.at(s.tx.x, s.tx.y) != geo::kFreeGray)
    throw std::invalid_argument("sample " + s.sample_id + ": TX is not on a FREE pixel");
  for (std::size_t i = 0; i < s.target.pixels.size(); ++i) {
    const bool building = s.map_channel.pixels[i] == geo::kBuildingGray;
    if (building != (s.target.pixels[i] == kBuildingGray))
      throw std::invalid_argument("sample " + s.sample_id + ": target zeros do not match building pixels");
  }
}

}  // namespace pmnet::dataset
