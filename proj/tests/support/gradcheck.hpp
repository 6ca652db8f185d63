#pragma once

// Central finite differences against the tape gradients. Include only from
// translation units built against the double-precision engine.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pmnet/common/random.hpp"
#include "pmnet/nn/ops.hpp"

namespace pmnet::testing {

static_assert(std::is_same_v<nn::Real, double>, "gradient checks need the double build");

struct GradMismatch {
  int checked = 0;
  int failed = 0;
  double worst_rel = 0.0;
  std::string first;
};

/// |a - n| <= atol + rtol * max(|a|, |n|); the absolute floor covers
/// entries whose gradient is numerically zero.
inline bool grad_close(double a, double n, double rtol, double atol) {
  return std::abs(a - n) <= atol + rtol * std::max(std::abs(a), std::abs(n));
}

/// Checks `per_param` random entries of every tensor in `params`.
template <typename Loss>
GradMismatch finite_difference_check(const std::vector<nn::Var>& params, const Loss& loss, int per_param, Rng& rng,
                                     double rtol = 1e-3, double atol = 1e-9, double h = 1e-6) {
  for (const auto& p : params) p->grad = nn::Tensor();
  nn::backward(loss());
  GradMismatch m;
  for (const auto& p : params) {
    const auto n = p->value.numel();
    for (int k = 0; k < per_param; ++k) {
      const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = loss()->value[0];
      p->value[i] = saved - h;
      const double down = loss()->value[0];
      p->value[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = p->grad.empty() ? 0.0 : p->grad[i];
      ++m.checked;
      const double scale = std::max(std::abs(analytic), std::abs(numeric));
      if (scale > atol / rtol) m.worst_rel = std::max(m.worst_rel, std::abs(analytic - numeric) / scale);
      if (!grad_close(analytic, numeric, rtol, atol) && m.failed++ == 0)
        m.first = "analytic " + std::to_string(analytic) + " numeric " + std::to_string(numeric);
    }
  }
  return m;
}

}  // namespace pmnet::testing
