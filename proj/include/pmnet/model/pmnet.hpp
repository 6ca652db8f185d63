#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmnet/nn/layers.hpp"

namespace pmnet::model::inline PMNET_NN_ABI {

using nn::Real;
using nn::Shape;
using nn::Tensor;
using nn::Var;

struct PmnetConfig {
  int input_channels = 2;
  int output_channels = 1;
  int input_size = 256;
  int output_stride = 8;                   ///< 8 or 16
  std::vector<int> atrous_rates{1, 2, 4};  ///< E6 atrous branches
  std::vector<int> multi_grids{1, 2, 4};   ///< E5 per-block dilation multipliers
  std::vector<int> block_counts{3, 3, 27, 3};
  int base_width = 64;                     ///< E1 channels; later stages scale from it
  std::uint64_t init_seed = 0;
  /// "hard_sigmoid" reaches exactly 0 on buildings; "sigmoid" is the logistic.
  std::string output_activation = "hard_sigmoid";

  /// Reduced profile for CPU runs: base_width 16, 128 px, fewer blocks.
  static PmnetConfig desk();

  /// Throws std::invalid_argument for out-of-range fields.
  void validate() const;
  bool operator==(const PmnetConfig&) const = default;
};

void to_json(nlohmann::json& j, const PmnetConfig& c);
void from_json(const nlohmann::json& j, PmnetConfig& c);

/// One row of the forward shape trace (batch dimension omitted).
struct StageShape {
  std::string stage;  ///< "input", "E1".."E6", "D6".."D1", "output"
  int c = 0, h = 0, w = 0;
  bool operator==(const StageShape&) const = default;
};

/// Shapes every stage must produce, derived arithmetically from the config.
std::vector<StageShape> planned_shapes(const PmnetConfig& cfg);
std::string format_shapes(const std::vector<StageShape>& shapes);

/// Thrown when a config cannot be wired; what() carries the shape report.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Encoder-decoder for pathloss map prediction.
///
/// Encoder: E1 stem (7x7/2 conv, BN, ReLU, 3x3/2 ceil max-pool), E2..E5
/// bottleneck ResLayers (E3 and E4 downsample by strided 3x3 conv; E5 is
/// dilated with multi-grid rates), E6 atrous pyramid (1x1 branch, one 3x3
/// branch per atrous rate, image-pool branch, 1x1 fusion).
///
/// Decoder (each conv is 3x3 + BN + ReLU; "up" is a 3x3/2 transposed conv):
///   D6 = [conv(E6), E4]     D5 = [up(D6), E3]     D4 = [up(D5), E2]
///   D3 = [conv(D4), E2]     D2 = [conv(D3), E1]
///   D1 = [bilinear(conv(D2)) to input size, input]
/// A stage uses "up" instead of conv whenever its skip is at the next finer
/// resolution (2n - 1). Head: 3x3 conv + BN + ReLU, 1x1 conv, output_activation.
class PmnetModel {
 public:
  /// Throws ShapeError when the decoder cannot meet the encoder skips.
  explicit PmnetModel(const PmnetConfig& cfg);
  PmnetModel(const PmnetModel&) = delete;
  PmnetModel& operator=(const PmnetModel&) = delete;

  const PmnetConfig& config() const { return cfg_; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }
  std::size_t parameter_count() const { return params_.parameter_count(); }

  /// x: N x input_channels x S x S. With training = true normalization
  /// uses batch statistics and updates the running ones. The trace, when
  /// given, receives one row per stage.
  Var forward(const Var& x, bool training, std::vector<StageShape>* trace = nullptr) const;

  /// Inference: running statistics, no graph, no writes. Safe to call
  /// from several threads at once.
  Tensor predict(const Tensor& x) const;

  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

 private:
  struct Impl;
  PmnetConfig cfg_;
  nn::ParameterStore params_;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace pmnet::model::inline PMNET_NN_ABI
