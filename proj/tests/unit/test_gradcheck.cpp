// Built against the double-precision engine so finite differences are not
// swamped by rounding.

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "pmnet/common/random.hpp"
#include "pmnet/model/pmnet.hpp"

using namespace pmnet;
using namespace pmnet::nn;

namespace {

Tensor random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(s);
  for (auto& v : t.vec()) v = rng.uniform(lo, hi);
  return t;
}

using pmnet::testing::finite_difference_check;

}  // namespace

TEST(GradCheck, ConvWithDilationStrideAndBias) {
  Rng rng(1);
  const auto x = parameter(random_tensor({2, 3, 9, 9}, rng));
  const auto w = parameter(random_tensor({4, 3, 3, 3}, rng));
  const auto b = parameter(random_tensor({1, 4, 1, 1}, rng));
  const auto target = random_tensor({2, 4, 5, 5}, rng);
  const auto r = finite_difference_check({x, w, b}, [&] { return mse_loss(conv2d(x, w, b, {2, 2, 2}), target); }, 10, rng);
  EXPECT_EQ(r.failed, 0) << r.first;
}

TEST(GradCheck, ConvTranspose) {
  Rng rng(2);
  const auto x = parameter(random_tensor({1, 3, 5, 5}, rng));
  const auto w = parameter(random_tensor({3, 2, 3, 3}, rng));
  const auto target = random_tensor({1, 2, 9, 9}, rng);
  const auto r = finite_difference_check({x, w}, [&] { return mse_loss(conv_transpose2d(x, w, nullptr, {2, 1, 0}), target); }, 12, rng);
  EXPECT_EQ(r.failed, 0) << r.first;
}

TEST(GradCheck, BatchNormTraining) {
  Rng rng(3);
  const auto x = parameter(random_tensor({3, 2, 4, 4}, rng));
  const auto g = parameter(random_tensor({1, 2, 1, 1}, rng, 0.5, 1.5));
  const auto b = parameter(random_tensor({1, 2, 1, 1}, rng));
  const auto target = random_tensor({3, 2, 4, 4}, rng);
  Tensor rm({1, 2, 1, 1}), rv({1, 2, 1, 1}, 1);
  const auto r = finite_difference_check({x, g, b}, [&] { return mse_loss(batch_norm(x, g, b, rm, rv, true), target); }, 12, rng);
  EXPECT_EQ(r.failed, 0) << r.first;
}

TEST(GradCheck, PoolingUpsampleConcatSigmoid) {
  Rng rng(4);
  const auto x = parameter(random_tensor({1, 2, 7, 7}, rng));
  const auto y = parameter(random_tensor({1, 1, 4, 4}, rng));
  const auto target = random_tensor({1, 5, 9, 9}, rng);
  const auto loss = [&] {
    const auto p = max_pool2d(x, 3, 2, 1, true);  // 2 x 4 x 4
    const auto g = broadcast_spatial(global_avg_pool(x), 4, 4);
    const auto c = concat({p, g, y});
    return mse_loss(sigmoid(upsample_bilinear(relu(add(c, c)), 9, 9)), target);
  };
  const auto r = finite_difference_check({x, y}, loss, 15, rng);
  EXPECT_EQ(r.failed, 0) << r.first;
}

TEST(GradCheck, HardSigmoidInsideAndSaturated) {
  Rng rng(7);
  const auto x = parameter(random_tensor({1, 1, 6, 6}, rng, -4.0, 4.0));
  const auto target = random_tensor({1, 1, 6, 6}, rng, 0.0, 1.0);
  const auto r = finite_difference_check({x}, [&] { return mse_loss(hard_sigmoid(x), target); }, 30, rng);
  EXPECT_EQ(r.failed, 0) << r.first;
}

TEST(GradCheck, FullModelHundredsOfParameters) {
  model::PmnetConfig cfg = model::PmnetConfig::desk();
  cfg.input_size = 32;
  cfg.base_width = 4;
  cfg.block_counts = {1, 1, 1, 1};
  cfg.init_seed = 5;
  model::PmnetModel net(cfg);
  Rng rng(6);
  const auto x = constant(random_tensor({2, 2, 32, 32}, rng, 0.0, 1.0));
  const auto target = random_tensor({2, 1, 32, 32}, rng, 0.0, 1.0);
  // Batch statistics in training mode keep every path differentiable; the
  // running statistics it writes do not feed back into the loss.
  const auto loss = [&] { return mse_loss(net.forward(x, true), target); };
  const auto params = net.params().trainable();
  const auto r = finite_difference_check(params, loss, 2, rng, 1e-3, 1e-10);
  EXPECT_GE(r.checked, 100);
  EXPECT_EQ(r.failed, 0) << r.checked << " checked, first failure: " << r.first;
}
