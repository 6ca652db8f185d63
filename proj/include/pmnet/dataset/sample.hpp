#pragma once

#include <string>
#include <vector>

#include "pmnet/common/image.hpp"
#include "pmnet/geo/building_map.hpp"
#include "pmnet/propagation/pathloss_grid.hpp"

namespace pmnet::dataset {

/// One generated (map, transmitter, ground truth) triple at full resolution.
struct Scene {
  std::string scene_id;
  geo::BuildingMap map;
  geo::TxLocation tx;
  propagation::PathlossGrid grid;  ///< dBm, after infill
  std::string generator;           ///< "3gpp" or "raylaunch"
};

/// Model-ready sample: map channel (FREE=255, BUILDING=0, FOLIAGE=128),
/// one-hot TX channel, gray target (0 on buildings, 1..255 elsewhere).
struct GraySample {
  GrayImage map_channel;
  GrayImage tx_channel;
  GrayImage target;
  std::string sample_id;
  std::string scene_id;
  std::string map_id;
  int crop_index = 0;
  std::string aug_tag = "orig";
  geo::Pixel tx;                 ///< position in sample coordinates
  double meters_per_pixel = 1.0;
  int tx_dilation = 0;

  int size() const { return map_channel.width; }
};

/// Paints the TX channel: 255 in a (2r+1)^2 square around the TX, else 0.
GrayImage make_tx_channel(int size, geo::Pixel tx, int dilation_radius = 0);

/// Gray target from a grid: to_gray on RoI pixels, 0 elsewhere.
GrayImage grid_to_gray(const propagation::PathlossGrid& grid);

/// Full-scene sample without cropping (the scene size is the model size).
GraySample make_sample(const Scene& scene, int tx_dilation = 0);

/// Throws std::invalid_argument when a per-sample invariant is broken:
/// equal square shapes, exactly one TX pixel (for radius 0), target zero
/// exactly on building pixels.
void check_sample(const GraySample& s);

}  // namespace pmnet::dataset
