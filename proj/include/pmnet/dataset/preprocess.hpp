#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmnet/dataset/sample.hpp"
#include "pmnet/propagation/pathloss_grid.hpp"

namespace pmnet::dataset {

/// Fills RoI pixels whose known_mask entry is 0.
///
/// Each missing pixel is the mean of the linear interpolations between the
/// nearest known RoI pixels to its left/right and above/below (whichever
/// brackets exist). Passes repeat with filled pixels counted as known;
/// pixels never bracketed take the mean of their nearest known neighbors
/// along the axes. Known pixels are left untouched and building pixels are
/// never read or written.
///
/// Requires at least 4 known RoI pixels (std::domain_error otherwise).
propagation::PathlossGrid interpolate_missing(const propagation::PathlossGrid& grid,
                                              const std::vector<std::uint8_t>& known_mask);

/// Known mask marking RoI pixels strictly above `floor_dbm`.
std::vector<std::uint8_t> reached_mask(const propagation::PathlossGrid& grid, double floor_dbm);

struct CropConfig {
  int crop_size = 64;
  int output_size = 256;
  int stride = 8;
  int tx_dilation = 0;
};

/// Slides a crop_size window over the scene on a stride grid, keeping only
/// windows that contain the TX, and upsamples each to output_size.
///
/// The map channel is upsampled nearest-neighbor so classes stay exact;
/// the target is bilinear in dBm over RoI source pixels, then gray
/// converted. meters_per_pixel is scaled by crop_size / output_size.
std::vector<GraySample> crop_augment(const Scene& scene, const CropConfig& cfg);

/// Number of windows crop_augment keeps for a TX at (x, y) in a scene of
/// the given size.
int crop_count(int scene_size, geo::Pixel tx, const CropConfig& cfg);

enum class Transform { Identity, Rot90, Rot180, Rot270, FlipH, FlipV, FlipD };

const char* transform_tag(Transform t);

/// Maps a pixel position under the transform for an n x n image.
/// Rot90 is a quarter turn clockwise in image coordinates
/// ((x, y) -> (n-1-y, x)); FlipD is the transpose.
geo::Pixel transform_pixel(geo::Pixel p, int n, Transform t);
GrayImage transform_image(const GrayImage& img, Transform t);
GraySample transform_sample(const GraySample& s, Transform t);

struct AugmentMode {
  bool rotations = true;
  bool flips = false;
};

/// Originals plus 90/180/270 rotations (rotation mode) and/or horizontal,
/// vertical and diagonal flips (flip mode). One mode gives x4, both x7.
std::vector<GraySample> rotate_flip_augment(const std::vector<GraySample>& samples, AugmentMode mode);

}  // namespace pmnet::dataset
