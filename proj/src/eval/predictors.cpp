#include "pmnet/eval/predictors.hpp"

#include <stdexcept>

#include "pmnet/dataset/builder.hpp"
#include "pmnet/geo/map_generator.hpp"

namespace pmnet::eval {

namespace {

void check_uniform(std::span<const dataset::GraySample* const> samples) {
  if (samples.empty()) throw std::invalid_argument("make_input: no samples");
  const int s = samples[0]->size();
  for (const auto* p : samples)
    if (p->size() != s || p->target.width != s)
      throw std::invalid_argument("make_input: samples differ in size");
}

}  // namespace

model::Tensor make_input(std::span<const dataset::GraySample* const> samples) {
  check_uniform(samples);
  const int s = samples[0]->size();
  const std::size_t plane = static_cast<std::size_t>(s) * s;
  model::Tensor x({static_cast<int>(samples.size()), 2, s, s});
  for (std::size_t n = 0; n < samples.size(); ++n) {
    auto* dst = x.data() + n * 2 * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      dst[i] = static_cast<model::Real>(samples[n]->map_channel.pixels[i] / 255.0);
      dst[plane + i] = static_cast<model::Real>(samples[n]->tx_channel.pixels[i] / 255.0);
    }
  }
  return x;
}

model::Tensor make_target(std::span<const dataset::GraySample* const> samples) {
  check_uniform(samples);
  const int s = samples[0]->size();
  const std::size_t plane = static_cast<std::size_t>(s) * s;
  model::Tensor t({static_cast<int>(samples.size()), 1, s, s});
  for (std::size_t n = 0; n < samples.size(); ++n)
    for (std::size_t i = 0; i < plane; ++i)
      t[n * plane + i] = static_cast<model::Real>(samples[n]->target.pixels[i] / 255.0);
  return t;
}

NormalizedMap output_map(const model::Tensor& out, int n) {
  const auto& s = out.shape();
  NormalizedMap m(s.w, s.h);
  const auto* src = out.data() + static_cast<std::size_t>(n) * s.c * s.plane();
  for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = src[i];
  return m;
}

Predictor model_predictor(const model::PmnetModel& model) {
  return [&model](const dataset::GraySample& s) {
    const dataset::GraySample* one[] = {&s};
    return output_map(model.predict(make_input(one)));
  };
}

Predictor baseline_predictor(const std::string& generator, const propagation::PropagationConfig& prop,
                             const propagation::RayLaunchConfig& rl) {
  if (generator != "3gpp" && generator != "raylaunch")
    throw std::invalid_argument("unknown baseline: " + generator);
  return [generator, prop, rl](const dataset::GraySample& s) {
    const auto map = geo::map_from_image(s.map_channel, s.meters_per_pixel, s.map_id);
    const auto grid = dataset::simulate(generator, map, {s.tx, prop.h_bs}, prop, rl);
    return normalize(dataset::grid_to_gray(grid));
  };
}

}  // namespace pmnet::eval
