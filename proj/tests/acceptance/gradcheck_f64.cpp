#include "checks.hpp"
#include "gradcheck.hpp"
#include "pmnet/model/pmnet.hpp"

namespace pmnet::acceptance {

GradcheckSummary model_gradcheck(double rtol) {
  auto cfg = model::PmnetConfig::desk();
  cfg.input_size = 32;
  cfg.base_width = 4;
  cfg.block_counts = {1, 1, 1, 1};
  cfg.init_seed = 21;
  model::PmnetModel net(cfg);
  Rng rng(22);
  nn::Tensor x({2, 2, 32, 32}), target({2, 1, 32, 32});
  for (auto& v : x.vec()) v = rng.uniform(0.0, 1.0);
  for (auto& v : target.vec()) v = rng.uniform(0.0, 1.0);
  const auto input = nn::constant(x);
  // training-mode normalization: batch statistics keep every path smooth
  const auto loss = [&] { return nn::mse_loss(net.forward(input, true), target); };
  const auto r = testing::finite_difference_check(net.params().trainable(), loss, 2, rng, rtol, 1e-10);
  return {r.checked, r.failed, r.worst_rel, r.first};
}

}  // namespace pmnet::acceptance
