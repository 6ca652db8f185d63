#include "pmnet/nn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace pmnet::nn::inline PMNET_NN_ABI {

Adam::Adam(std::vector<Var> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  if (!(cfg_.lr > 0)) throw std::invalid_argument("Adam: learning rate must be positive");
  for (const auto& p : params_) {
    m_.emplace_back(p->value.numel(), 0.0);
    v_.emplace_back(p->value.numel(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = *params_[k];
    if (p.grad.numel() != p.value.numel()) continue;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < m.size(); ++i) {
      double g = p.grad[i];
      if (cfg_.weight_decay != 0.0) g += cfg_.weight_decay * p.value[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double update = cfg_.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg_.eps);
      p.value[i] = static_cast<Real>(p.value[i] - update);
    }
  }
}

void Adam::zero_grad() {
  for (const auto& p : params_) p->grad = Tensor();
}

double step_lr(double lr0, double gamma, int step_epochs, int epoch) {
  if (step_epochs <= 0) return lr0;
  return lr0 * std::pow(gamma, epoch / step_epochs);
}

}  // namespace pmnet::nn::inline PMNET_NN_ABI
