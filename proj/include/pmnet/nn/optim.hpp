#pragma once

#include <vector>

#include "pmnet/nn/autograd.hpp"

namespace pmnet::nn::inline PMNET_NN_ABI {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Adam with bias-corrected moments. Parameters without an accumulated
/// gradient are skipped.
class Adam {
 public:
  Adam(std::vector<Var> params, AdamConfig cfg);

  void step();
  void zero_grad();

  double lr() const { return cfg_.lr; }
  void set_lr(double lr) { cfg_.lr = lr; }
  long long steps() const { return t_; }

 private:
  std::vector<Var> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  long long t_ = 0;
};

/// Learning rate after `epoch` completed epochs: lr0 * gamma^(epoch / step).
double step_lr(double lr0, double gamma, int step_epochs, int epoch);

}  // namespace pmnet::nn::inline PMNET_NN_ABI
