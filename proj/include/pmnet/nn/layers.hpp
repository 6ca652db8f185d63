#pragma once

#include <string>
#include <vector>

#include "pmnet/common/random.hpp"
#include "pmnet/nn/ops.hpp"

namespace pmnet::nn::inline PMNET_NN_ABI {

/// Ordered named tensors of a model: trainable parameters and
/// non-trainable buffers (normalization running statistics).
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Var var;
    bool trainable;
  };

  /// Throws std::invalid_argument on a duplicate name.
  Var add_parameter(const std::string& name, Tensor init);
  Var add_buffer(const std::string& name, Tensor init);

  const std::vector<Entry>& entries() const { return entries_; }
  /// Null when absent.
  Var find(const std::string& name) const;
  std::vector<Var> trainable() const;
  /// Trainable parameters whose name does not start with any listed prefix.
  std::vector<Var> trainable_except(const std::vector<std::string>& frozen_prefixes) const;
  std::size_t parameter_count() const;
  void zero_grad();

 private:
  Var add(const std::string& name, Tensor init, bool trainable);
  std::vector<Entry> entries_;
};

/// He-normal weights (std sqrt(2 / fan_in)), zero bias.
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParameterStore& ps, const std::string& name, int in_ch, int out_ch, int kernel, Conv2dOptions opt,
         bool bias, Rng& rng);
  Var operator()(const Var& x) const { return conv2d(x, w_, b_, opt_); }
  const Conv2dOptions& options() const { return opt_; }

 private:
  Var w_, b_;
  Conv2dOptions opt_;
};

class ConvTranspose2d {
 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(ParameterStore& ps, const std::string& name, int in_ch, int out_ch, int kernel,
                  ConvTranspose2dOptions opt, bool bias, Rng& rng);
  Var operator()(const Var& x) const { return conv_transpose2d(x, w_, b_, opt_); }

 private:
  Var w_, b_;
  ConvTranspose2dOptions opt_;
};

/// Unit scale, zero shift; running mean 0 and variance 1.
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  BatchNorm2d(ParameterStore& ps, const std::string& name, int channels);
  /// Training mode writes the running statistics and so must not run
  /// concurrently with anything else on the same model.
  Var operator()(const Var& x, bool training) const {
    return batch_norm(x, gamma_, beta_, mean_->value, var_->value, training);
  }

 private:
  Var gamma_, beta_, mean_, var_;
};

}  // namespace pmnet::nn::inline PMNET_NN_ABI
