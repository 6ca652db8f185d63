#include "pmnet/eval/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pmnet::eval {

namespace {

constexpr int kGutter = 4;

void mark_tx(RgbImage& img, geo::Pixel tx) {
  for (int d = -2; d <= 2; ++d) {
    if (tx.x + d >= 0 && tx.x + d < img.width && tx.y >= 0 && tx.y < img.height) img.set(tx.x + d, tx.y, 255, 0, 0);
    if (tx.y + d >= 0 && tx.y + d < img.height && tx.x >= 0 && tx.x < img.width) img.set(tx.x, tx.y + d, 255, 0, 0);
  }
}

}  // namespace

RgbImage render_gray(const GrayImage& gray, std::optional<geo::Pixel> tx) {
  RgbImage img(gray.width, gray.height);
  for (int y = 0; y < gray.height; ++y)
    for (int x = 0; x < gray.width; ++x) {
      const auto g = gray.at(x, y);
      img.set(x, y, g, g, g);
    }
  if (tx) mark_tx(img, *tx);
  return img;
}

RgbImage render_difference(const GrayImage& pred, const GrayImage& gt, int range, std::optional<geo::Pixel> tx) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw std::invalid_argument("render_difference: shape mismatch");
  if (range < 1) throw std::invalid_argument("render_difference: range must be positive");
  RgbImage img(gt.width, gt.height);
  for (int y = 0; y < gt.height; ++y)
    for (int x = 0; x < gt.width; ++x) {
      const double t = std::clamp((pred.at(x, y) - gt.at(x, y)) / static_cast<double>(range), -1.0, 1.0);
      const auto fade = static_cast<std::uint8_t>(std::lround(128.0 * (1.0 - std::abs(t))));
      const auto full = static_cast<std::uint8_t>(std::lround(128.0 + 127.0 * std::abs(t)));
      if (t >= 0)
        img.set(x, y, full, fade, fade);
      else
        img.set(x, y, fade, fade, full);
    }
  if (tx) mark_tx(img, *tx);
  return img;
}

RgbImage side_by_side(const std::vector<RgbImage>& panels) {
  if (panels.empty()) throw std::invalid_argument("side_by_side: no panels");
  int w = 0, h = 0;
  for (const auto& p : panels) {
    w += p.width;
    h = std::max(h, p.height);
  }
  w += kGutter * static_cast<int>(panels.size() - 1);
  RgbImage out(w, h);
  std::fill(out.pixels.begin(), out.pixels.end(), std::uint8_t{255});
  int x0 = 0;
  for (const auto& p : panels) {
    for (int y = 0; y < p.height; ++y)
      std::copy_n(p.pixels.begin() + static_cast<std::ptrdiff_t>(y) * p.width * 3, p.width * 3,
                  out.pixels.begin() + (static_cast<std::ptrdiff_t>(y) * w + x0) * 3);
    x0 += p.width + kGutter;
  }
  return out;
}

}  // namespace pmnet::eval
