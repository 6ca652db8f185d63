#include "pmnet/nn/tensor.hpp"

#include <algorithm>
#include <stdexcept>

namespace pmnet::nn::inline PMNET_NN_ABI {

std::string Shape::str() const {
  return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
}

void Tensor::fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(Shape s) const {
  if (s.numel() != numel()) throw std::invalid_argument("reshape " + shape_.str() + " -> " + s.str());
  Tensor t = *this;
  t.shape_ = s;
  return t;
}

}  // namespace pmnet::nn::inline PMNET_NN_ABI
