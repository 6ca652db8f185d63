#include "pmnet/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace pmnet::nn::inline PMNET_NN_ABI {

Var ParameterStore::add(const std::string& name, Tensor init, bool trainable) {
  if (find(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  auto v = trainable ? parameter(std::move(init)) : constant(std::move(init));
  entries_.push_back({name, v, trainable});
  return v;
}

Var ParameterStore::add_parameter(const std::string& name, Tensor init) { return add(name, std::move(init), true); }
Var ParameterStore::add_buffer(const std::string& name, Tensor init) { return add(name, std::move(init), false); }

Var ParameterStore::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e.var;
  return nullptr;
}

std::vector<Var> ParameterStore::trainable() const { return trainable_except({}); }

std::vector<Var> ParameterStore::trainable_except(const std::vector<std::string>& frozen_prefixes) const {
  std::vector<Var> out;
  for (const auto& e : entries_) {
    if (!e.trainable) continue;
    bool frozen = false;
    for (const auto& p : frozen_prefixes) frozen |= e.name.starts_with(p);
    if (!frozen) out.push_back(e.var);
  }
  return out;
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_)
    if (e.trainable) n += e.var->value.numel();
  return n;
}

void ParameterStore::zero_grad() {
  for (const auto& e : entries_)
    if (e.trainable) e.var->grad = Tensor();
}

namespace {

Tensor he_normal(Shape s, int fan_in, Rng& rng) {
  Tensor t(s);
  const double std = std::sqrt(2.0 / fan_in);
  for (auto& v : t.vec()) v = static_cast<Real>(rng.normal() * std);
  return t;
}

}  // namespace

Conv2d::Conv2d(ParameterStore& ps, const std::string& name, int in_ch, int out_ch, int kernel, Conv2dOptions opt,
               bool bias, Rng& rng)
    : opt_(opt) {
  if (kernel % 2 == 0) throw std::invalid_argument(name + ": kernel size must be odd");
  w_ = ps.add_parameter(name + ".weight", he_normal({out_ch, in_ch, kernel, kernel}, in_ch * kernel * kernel, rng));
  if (bias) b_ = ps.add_parameter(name + ".bias", Tensor({out_ch, 1, 1, 1}));
}

ConvTranspose2d::ConvTranspose2d(ParameterStore& ps, const std::string& name, int in_ch, int out_ch, int kernel,
                                 ConvTranspose2dOptions opt, bool bias, Rng& rng)
    : opt_(opt) {
  w_ = ps.add_parameter(name + ".weight", he_normal({in_ch, out_ch, kernel, kernel}, in_ch * kernel * kernel, rng));
  if (bias) b_ = ps.add_parameter(name + ".bias", Tensor({out_ch, 1, 1, 1}));
}

BatchNorm2d::BatchNorm2d(ParameterStore& ps, const std::string& name, int channels) {
  gamma_ = ps.add_parameter(name + ".weight", Tensor({channels, 1, 1, 1}, 1));
  beta_ = ps.add_parameter(name + ".bias", Tensor({channels, 1, 1, 1}, 0));
  mean_ = ps.add_buffer(name + ".running_mean", Tensor({channels, 1, 1, 1}, 0));
  var_ = ps.add_buffer(name + ".running_var", Tensor({channels, 1, 1, 1}, 1));
}

}  // namespace pmnet::nn::inline PMNET_NN_ABI
