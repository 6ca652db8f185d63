#include "pmnet/dataset/gray.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pmnet::dataset {

std::uint8_t to_gray(double p_rx_dbm) {
  if (std::isnan(p_rx_dbm)) return 1;
  const double g = std::round(std::clamp(p_rx_dbm, kGrayMinDbm, kGrayMaxDbm) + 255.0);
  return static_cast<std::uint8_t>(std::clamp(g, 1.0, 255.0));
}

double from_gray(std::uint8_t gray) {
  if (gray == kBuildingGray) throw std::domain_error("from_gray: gray 0 marks a building pixel");
  return static_cast<double>(gray) - 255.0;
}

}  // namespace pmnet::dataset
