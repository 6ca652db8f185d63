#pragma once

#include <vector>

#include "pmnet/nn/autograd.hpp"

namespace pmnet::nn::inline PMNET_NN_ABI {

struct Conv2dOptions {
  int stride = 1;
  int padding = 0;
  int dilation = 1;  ///< atrous rate
};

/// Output extent of a (possibly dilated) convolution along one axis.
int conv_out_size(int in, int kernel, const Conv2dOptions& o);

/// Cross-correlation of x (N x Cin x H x W) with w (Cout x Cin x k x k),
/// taps spaced `dilation` apart; bias (Cout) may be null. Throws
/// std::invalid_argument on channel mismatch or an empty output.
Var conv2d(const Var& x, const Var& w, const Var& bias, const Conv2dOptions& o);

struct ConvTranspose2dOptions {
  int stride = 1;
  int padding = 0;
  int output_padding = 0;
};

/// Transposed convolution, w is Cin x Cout x k x k (the adjoint of conv2d).
/// Output extent: (in - 1) * stride - 2 * padding + k + output_padding.
Var conv_transpose2d(const Var& x, const Var& w, const Var& bias, const ConvTranspose2dOptions& o);

/// Per-channel batch normalization. In training mode batch statistics are
/// used and the running estimates are updated in place (momentum weights
/// the new batch); in inference mode the running estimates are used and
/// nothing is written.
Var batch_norm(const Var& x, const Var& gamma, const Var& beta, Tensor& running_mean, Tensor& running_var,
               bool training, Real momentum = Real(0.1), Real eps = Real(1e-5));

Var relu(const Var& x);
Var sigmoid(const Var& x);
/// clamp(0.5 + x / 4, 0, 1): the logistic slope at 0, saturating exactly.
Var hard_sigmoid(const Var& x);
Var add(const Var& a, const Var& b);
/// Concatenates along channels; batch and spatial extents must agree.
Var concat(const std::vector<Var>& xs);

/// Max pooling with symmetric padding; ceil_mode rounds the output extent up
/// (windows starting in the padding are dropped, as is conventional).
Var max_pool2d(const Var& x, int kernel, int stride, int padding, bool ceil_mode);

/// Spatial mean to N x C x 1 x 1.
Var global_avg_pool(const Var& x);
/// Repeats an N x C x 1 x 1 tensor over h x w.
Var broadcast_spatial(const Var& x, int h, int w);
/// Bilinear resize with aligned corners.
Var upsample_bilinear(const Var& x, int h, int w);

/// Mean squared error over every element; returns a single-element node.
Var mse_loss(const Var& pred, const Tensor& target);

}  // namespace pmnet::nn::inline PMNET_NN_ABI
