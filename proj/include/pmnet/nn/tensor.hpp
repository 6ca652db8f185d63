#pragma once

#include <cstddef>
#include <string>
#include <vector>

#ifdef PMNET_REAL_DOUBLE
#define PMNET_NN_ABI f64
#else
#define PMNET_NN_ABI f32
#endif

namespace pmnet::nn::inline PMNET_NN_ABI {

#ifdef PMNET_REAL_DOUBLE
using Real = double;
#else
using Real = float;
#endif

/// NCHW extents. Vectors and scalars use the trailing dims set to 1.
struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t numel() const { return static_cast<std::size_t>(n) * c * h * w; }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape s, Real fill = 0) : shape_(s), data_(s.numel(), fill) {}

  const Shape& shape() const { return shape_; }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::vector<Real>& vec() { return data_; }
  const std::vector<Real>& vec() const { return data_; }

  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }

  std::size_t offset(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  Real& at(int n, int c, int y, int x) { return data_[offset(n, c, y, x)]; }
  Real at(int n, int c, int y, int x) const { return data_[offset(n, c, y, x)]; }

  void fill(Real v);
  /// Same data, new extents with equal element count.
  Tensor reshaped(Shape s) const;

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<Real> data_;
};

}  // namespace pmnet::nn::inline PMNET_NN_ABI
