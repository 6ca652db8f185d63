#pragma once

#include <cstdint>

namespace pmnet::dataset {

/// Min-max gray mapping at 1 dB per level: -254 dBm -> 1, 0 dBm -> 255.
/// Gray 0 is reserved for building pixels.
inline constexpr double kGrayMinDbm = -254.0;
inline constexpr double kGrayMaxDbm = 0.0;
inline constexpr std::uint8_t kBuildingGray = 0;

/// round(p + 255) clamped to [1, 255].
std::uint8_t to_gray(double p_rx_dbm);

/// gray - 255. Throws std::domain_error for gray 0 (building).
double from_gray(std::uint8_t gray);

/// Continuous version for model outputs in [0, 1]: value * 255 - 255.
inline double normalized_to_dbm(double v) { return v * 255.0 - 255.0; }

}  // namespace pmnet::dataset
