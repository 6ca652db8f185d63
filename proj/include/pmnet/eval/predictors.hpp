#pragma once

#include <span>
#include <string>

#include "pmnet/eval/metrics.hpp"
#include "pmnet/model/pmnet.hpp"
#include "pmnet/propagation/models.hpp"

namespace pmnet::eval {

/// Stacks samples into an N x 2 x S x S input: map / 255, tx / 255.
model::Tensor make_input(std::span<const dataset::GraySample* const> samples);
/// N x 1 x S x S target: gray / 255.
model::Tensor make_target(std::span<const dataset::GraySample* const> samples);
/// Channel 0 of batch entry n as a normalized map.
NormalizedMap output_map(const model::Tensor& out, int n = 0);

/// Single-sample inference with the model (safe to share across threads).
Predictor model_predictor(const model::PmnetModel& model);

/// Analytic or simulated baseline recomputed from the sample's map channel,
/// TX position and pixel scale: "3gpp" or "raylaunch".
Predictor baseline_predictor(const std::string& generator, const propagation::PropagationConfig& prop = {},
                             const propagation::RayLaunchConfig& rl = {});

}  // namespace pmnet::eval
