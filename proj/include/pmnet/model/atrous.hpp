#pragma once

#include "pmnet/nn/tensor.hpp"

namespace pmnet::model::inline PMNET_NN_ABI {

using nn::Real;
using nn::Tensor;

/// Atrous (dilated) convolution of f (N x Cin x H x W) with w
/// (Cout x Cin x k x k) at rate r:
///   g[i, j] = sum_m sum_n f[i*stride + r*m - padding, j*stride + r*n - padding] * w[m, n]
/// summed over input channels, zero outside f. r = 1 is plain convolution.
///
/// Throws std::domain_error for r < 1, an even or non-square kernel, a
/// channel mismatch or an empty output.
Tensor atrous_conv2d(const Tensor& f, const Tensor& w, int r, int stride = 1, int padding = 0);

}  // namespace pmnet::model::inline PMNET_NN_ABI
