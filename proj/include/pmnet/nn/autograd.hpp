#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "pmnet/nn/tensor.hpp"

namespace pmnet::nn::inline PMNET_NN_ABI {

/// Graph node: a value, its gradient, and how to push the gradient to the
/// parents. Ops build nodes only while gradients are enabled on the calling
/// thread and some input requires a gradient.
struct Node {
  Tensor value;
  Tensor grad;  ///< allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  /// Zero-initialized gradient buffer shaped like value.
  Tensor& grad_buffer();
};

using Var = std::shared_ptr<Node>;

/// Leaf holding a constant (no gradient).
Var constant(Tensor t);
/// Leaf that accumulates gradients (a trainable parameter).
Var parameter(Tensor t);

/// Whether ops on the current thread record the graph.
bool grad_enabled();

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Backpropagates from a single-element root (seeded with gradient 1).
/// Gradients accumulate into every reachable node that requires one.
void backward(const Var& root);

/// Node for an op result; parents and backward_fn are attached only when
/// recording is on and some parent requires a gradient.
Var make_result(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn);

}  // namespace pmnet::nn::inline PMNET_NN_ABI
