#pragma once

#include <optional>
#include <vector>

#include "pmnet/common/image.hpp"
#include "pmnet/geo/building_map.hpp"

namespace pmnet::eval {

/// Gray pathloss image as RGB (buildings stay black), with an optional red
/// cross at the TX.
RgbImage render_gray(const GrayImage& gray, std::optional<geo::Pixel> tx = std::nullopt);

/// Diverging rendering of pred - gt in gray levels: mid gray (128) for
/// zero, toward red for over-prediction and blue for under-prediction,
/// saturating at +/- range levels.
RgbImage render_difference(const GrayImage& pred, const GrayImage& gt, int range = 32,
                           std::optional<geo::Pixel> tx = std::nullopt);

/// Panels left to right with a white 4 px gutter.
RgbImage side_by_side(const std::vector<RgbImage>& panels);

}  // namespace pmnet::eval
