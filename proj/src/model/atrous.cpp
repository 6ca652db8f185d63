#include "pmnet/model/atrous.hpp"

#include <stdexcept>

#include "pmnet/nn/ops.hpp"

namespace pmnet::model::inline PMNET_NN_ABI {

Tensor atrous_conv2d(const Tensor& f, const Tensor& w, int r, int stride, int padding) {
  const auto& fs = f.shape();
  const auto& ws = w.shape();
  if (r < 1) throw std::domain_error("atrous_conv2d: rate must be >= 1");
  if (stride < 1 || padding < 0) throw std::domain_error("atrous_conv2d: bad stride or padding");
  if (ws.h != ws.w || ws.h % 2 == 0) throw std::domain_error("atrous_conv2d: kernel must be square with odd size");
  if (ws.c != fs.c)
    throw std::domain_error("atrous_conv2d: input " + fs.str() + " does not match kernel " + ws.str());
  const nn::Conv2dOptions o{stride, padding, r};
  if (nn::conv_out_size(fs.h, ws.h, o) < 1 || nn::conv_out_size(fs.w, ws.w, o) < 1)
    throw std::domain_error("atrous_conv2d: empty output for input " + fs.str());
  nn::NoGradGuard guard;
  return nn::conv2d(nn::constant(f), nn::constant(w), nullptr, o)->value;
}

}  // namespace pmnet::model::inline PMNET_NN_ABI
