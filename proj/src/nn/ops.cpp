#include "pmnet/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Core>

namespace pmnet::nn::inline PMNET_NN_ABI {

namespace {

using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

// Caps the im2col buffer (elements) by batching fewer samples per GEMM.
constexpr std::size_t kColBudget = std::size_t{1} << 22;

// Convolution geometry on one sample: input C x H x W, output Ho x Wo.
struct Geom {
  int c, h, w, k, s, p, d, ho, wo;
  std::size_t rows() const { return static_cast<std::size_t>(c) * k * k; }
  std::size_t out_plane() const { return static_cast<std::size_t>(ho) * wo; }
  std::size_t in_plane() const { return static_cast<std::size_t>(h) * w; }
};

int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }
int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

// Range of output columns ox whose tap ix = ox*s - p + off lies inside [0, w).
void valid_range(int off, const Geom& g, int size, int out, int& lo, int& hi) {
  lo = std::min(out, std::max(0, ceil_div(g.p - off, g.s)));
  hi = std::min(out, floor_div(size - 1 + g.p - off, g.s) + 1);
  if (hi < lo) hi = lo;
}

// col is rows() x (cnt * out_plane()), row-major.
void im2col(const Real* x, int cnt, const Geom& g, Real* col) {
  const std::size_t m = static_cast<std::size_t>(cnt) * g.out_plane();
  for (int c = 0; c < g.c; ++c) {
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        Real* row = col + ((static_cast<std::size_t>(c) * g.k + ky) * g.k + kx) * m;
        int x_lo, x_hi;
        valid_range(kx * g.d, g, g.w, g.wo, x_lo, x_hi);
        for (int n = 0; n < cnt; ++n) {
          const Real* plane = x + (static_cast<std::size_t>(n) * g.c + c) * g.in_plane();
          Real* out = row + static_cast<std::size_t>(n) * g.out_plane();
          for (int oy = 0; oy < g.ho; ++oy) {
            Real* dst = out + static_cast<std::size_t>(oy) * g.wo;
            const int iy = oy * g.s - g.p + ky * g.d;
            if (iy < 0 || iy >= g.h) {
              std::fill(dst, dst + g.wo, Real(0));
              continue;
            }
            std::fill(dst, dst + x_lo, Real(0));
            const Real* src = plane + static_cast<std::size_t>(iy) * g.w - g.p + kx * g.d;
            if (g.s == 1) {
              std::copy(src + x_lo, src + x_hi, dst + x_lo);
            } else {
              for (int ox = x_lo; ox < x_hi; ++ox) dst[ox] = src[ox * g.s];
            }
            std::fill(dst + x_hi, dst + g.wo, Real(0));
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates col entries back into x.
void col2im(const Real* col, int cnt, const Geom& g, Real* x) {
  const std::size_t m = static_cast<std::size_t>(cnt) * g.out_plane();
  for (int c = 0; c < g.c; ++c) {
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const Real* row = col + ((static_cast<std::size_t>(c) * g.k + ky) * g.k + kx) * m;
        int x_lo, x_hi;
        valid_range(kx * g.d, g, g.w, g.wo, x_lo, x_hi);
        for (int n = 0; n < cnt; ++n) {
          Real* plane = x + (static_cast<std::size_t>(n) * g.c + c) * g.in_plane();
          const Real* in = row + static_cast<std::size_t>(n) * g.out_plane();
          for (int oy = 0; oy < g.ho; ++oy) {
            const int iy = oy * g.s - g.p + ky * g.d;
            if (iy < 0 || iy >= g.h) continue;
            const Real* src = in + static_cast<std::size_t>(oy) * g.wo;
            Real* dst = plane + static_cast<std::size_t>(iy) * g.w - g.p + kx * g.d;
            for (int ox = x_lo; ox < x_hi; ++ox) dst[ox * g.s] += src[ox];
          }
        }
      }
    }
  }
}

int chunk_samples(const Geom& g, int n) {
  const std::size_t per = std::max<std::size_t>(1, g.rows() * g.out_plane());
  return static_cast<int>(std::clamp<std::size_t>(kColBudget / per, 1, static_cast<std::size_t>(n)));
}

// Gathers channel planes of samples [n0, n0+cnt) into a C x (cnt*plane) block.
void gather(const Real* t, int n0, int cnt, int c, std::size_t plane, Real* out) {
  for (int i = 0; i < cnt; ++i)
    for (int ch = 0; ch < c; ++ch) {
      const Real* src = t + (static_cast<std::size_t>(n0 + i) * c + ch) * plane;
      std::copy(src, src + plane, out + static_cast<std::size_t>(ch) * cnt * plane + i * plane);
    }
}

void scatter(const Real* block, int n0, int cnt, int c, std::size_t plane, Real* t, bool accumulate) {
  for (int i = 0; i < cnt; ++i)
    for (int ch = 0; ch < c; ++ch) {
      const Real* src = block + static_cast<std::size_t>(ch) * cnt * plane + i * plane;
      Real* dst = t + (static_cast<std::size_t>(n0 + i) * c + ch) * plane;
      if (accumulate)
        for (std::size_t j = 0; j < plane; ++j) dst[j] += src[j];
      else
        std::copy(src, src + plane, dst);
    }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void add_bias(Tensor& y, const Tensor& b) {
  const auto& s = y.shape();
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      Real* p = y.data() + (static_cast<std::size_t>(n) * s.c + c) * s.plane();
      const Real v = b[c];
      for (std::size_t i = 0; i < s.plane(); ++i) p[i] += v;
    }
}

void bias_grad(const Tensor& gy, Tensor& gb) {
  const auto& s = gy.shape();
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const Real* p = gy.data() + (static_cast<std::size_t>(n) * s.c + c) * s.plane();
      Real acc = 0;
      for (std::size_t i = 0; i < s.plane(); ++i) acc += p[i];
      gb[c] += acc;
    }
}

}  // namespace

int conv_out_size(int in, int kernel, const Conv2dOptions& o) {
  return (in + 2 * o.padding - o.dilation * (kernel - 1) - 1) / o.stride + 1;
}

Var conv2d(const Var& x, const Var& w, const Var& bias, const Conv2dOptions& o) {
  const Shape xs = x->value.shape();
  const Shape ws = w->value.shape();
  require(o.stride >= 1 && o.dilation >= 1 && o.padding >= 0, "conv2d: bad stride/dilation/padding");
  require(ws.h == ws.w, "conv2d: kernel must be square, got " + ws.str());
  require(ws.c == xs.c, "conv2d: input has " + std::to_string(xs.c) + " channels, kernel expects " +
                            std::to_string(ws.c));
  if (bias) require(bias->value.numel() == static_cast<std::size_t>(ws.n), "conv2d: bias size mismatch");
  const int k = ws.h;
  const Geom g{xs.c, xs.h, xs.w, k, o.stride, o.padding, o.dilation,
               conv_out_size(xs.h, k, o), conv_out_size(xs.w, k, o)};
  require(g.ho > 0 && g.wo > 0, "conv2d: empty output for input " + xs.str() + " and kernel " + ws.str());
  const int cout = ws.n;
  const Shape ys{xs.n, cout, g.ho, g.wo};
  Tensor y(ys);

  const int chunk = chunk_samples(g, xs.n);
  std::vector<Real> col(g.rows() * chunk * g.out_plane());
  std::vector<Real> out(static_cast<std::size_t>(cout) * chunk * g.out_plane());
  const CMapMat wm(w->value.data(), cout, static_cast<Eigen::Index>(g.rows()));
  for (int n0 = 0; n0 < xs.n; n0 += chunk) {
    const int cnt = std::min(chunk, xs.n - n0);
    const auto m = static_cast<Eigen::Index>(cnt * g.out_plane());
    im2col(x->value.data() + static_cast<std::size_t>(n0) * xs.c * g.in_plane(), cnt, g, col.data());
    const CMapMat cm(col.data(), static_cast<Eigen::Index>(g.rows()), m);
    if (cnt == 1) {
      MapMat(y.data() + static_cast<std::size_t>(n0) * cout * g.out_plane(), cout, m).noalias() = wm * cm;
    } else {
      MapMat(out.data(), cout, m).noalias() = wm * cm;
      scatter(out.data(), n0, cnt, cout, g.out_plane(), y.data(), false);
    }
  }
  if (bias) add_bias(y, bias->value);

  return make_result(std::move(y), {x, w, bias}, [x, w, bias, g, cout](Node& self) {
    const Shape xs = x->value.shape();
    const Tensor& gy = self.grad;
    const int chunk = chunk_samples(g, xs.n);
    std::vector<Real> col(g.rows() * chunk * g.out_plane());
    std::vector<Real> gblock(static_cast<std::size_t>(cout) * chunk * g.out_plane());
    const CMapMat wm(w->value.data(), cout, static_cast<Eigen::Index>(g.rows()));
    for (int n0 = 0; n0 < xs.n; n0 += chunk) {
      const int cnt = std::min(chunk, xs.n - n0);
      const auto m = static_cast<Eigen::Index>(cnt * g.out_plane());
      const Real* gptr = gy.data() + static_cast<std::size_t>(n0) * cout * g.out_plane();
      if (cnt > 1) {
        gather(gy.data(), n0, cnt, cout, g.out_plane(), gblock.data());
        gptr = gblock.data();
      }
      const CMapMat gm(gptr, cout, m);
      if (w->requires_grad) {
        im2col(x->value.data() + static_cast<std::size_t>(n0) * xs.c * g.in_plane(), cnt, g, col.data());
        MapMat(w->grad_buffer().data(), cout, static_cast<Eigen::Index>(g.rows())).noalias() +=
            gm * CMapMat(col.data(), static_cast<Eigen::Index>(g.rows()), m).transpose();
      }
      if (x->requires_grad) {
        MapMat(col.data(), static_cast<Eigen::Index>(g.rows()), m).noalias() = wm.transpose() * gm;
        col2im(col.data(), cnt, g, x->grad_buffer().data() + static_cast<std::size_t>(n0) * xs.c * g.in_plane());
      }
    }
    if (bias && bias->requires_grad) bias_grad(gy, bias->grad_buffer());
  });
}

Var conv_transpose2d(const Var& x, const Var& w, const Var& bias, const ConvTranspose2dOptions& o) {
  const Shape xs = x->value.shape();
  const Shape ws = w->value.shape();
  require(o.stride >= 1 && o.padding >= 0 && o.output_padding >= 0 && o.output_padding < o.stride,
          "conv_transpose2d: bad stride/padding/output_padding");
  require(ws.h == ws.w, "conv_transpose2d: kernel must be square, got " + ws.str());
  require(ws.n == xs.c, "conv_transpose2d: input has " + std::to_string(xs.c) + " channels, kernel expects " +
                            std::to_string(ws.n));
  const int k = ws.h;
  const int cout = ws.c;
  if (bias) require(bias->value.numel() == static_cast<std::size_t>(cout), "conv_transpose2d: bias size mismatch");
  const int ho = (xs.h - 1) * o.stride - 2 * o.padding + k + o.output_padding;
  const int wo = (xs.w - 1) * o.stride - 2 * o.padding + k + o.output_padding;
  require(ho > 0 && wo > 0, "conv_transpose2d: empty output for input " + xs.str());
  // the matching forward convolution maps the output (ho x wo) back to the input extent
  const Geom g{cout, ho, wo, k, o.stride, o.padding, 1, xs.h, xs.w};
  const int cin = xs.c;
  Tensor y(Shape{xs.n, cout, ho, wo});

  const int chunk = chunk_samples(g, xs.n);
  std::vector<Real> col(g.rows() * chunk * g.out_plane());
  std::vector<Real> xblock(static_cast<std::size_t>(cin) * chunk * g.out_plane());
  const CMapMat wm(w->value.data(), cin, static_cast<Eigen::Index>(g.rows()));
  for (int n0 = 0; n0 < xs.n; n0 += chunk) {
    const int cnt = std::min(chunk, xs.n - n0);
    const auto m = static_cast<Eigen::Index>(cnt * g.out_plane());
    const Real* xptr = x->value.data() + static_cast<std::size_t>(n0) * cin * g.out_plane();
    if (cnt > 1) {
      gather(x->value.data(), n0, cnt, cin, g.out_plane(), xblock.data());
      xptr = xblock.data();
    }
    MapMat(col.data(), static_cast<Eigen::Index>(g.rows()), m).noalias() = wm.transpose() * CMapMat(xptr, cin, m);
    col2im(col.data(), cnt, g, y.data() + static_cast<std::size_t>(n0) * cout * g.in_plane());
  }
  if (bias) add_bias(y, bias->value);

  return make_result(std::move(y), {x, w, bias}, [x, w, bias, g, cin](Node& self) {
    const Shape xs = x->value.shape();
    const Tensor& gy = self.grad;
    const int chunk = chunk_samples(g, xs.n);
    std::vector<Real> col(g.rows() * chunk * g.out_plane());
    std::vector<Real> block(static_cast<std::size_t>(cin) * chunk * g.out_plane());
    const CMapMat wm(w->value.data(), cin, static_cast<Eigen::Index>(g.rows()));
    for (int n0 = 0; n0 < xs.n; n0 += chunk) {
      const int cnt = std::min(chunk, xs.n - n0);
      const auto m = static_cast<Eigen::Index>(cnt * g.out_plane());
      im2col(gy.data() + static_cast<std::size_t>(n0) * g.c * g.in_plane(), cnt, g, col.data());
      const CMapMat cm(col.data(), static_cast<Eigen::Index>(g.rows()), m);
      if (w->requires_grad) {
        const Real* xptr = x->value.data() + static_cast<std::size_t>(n0) * cin * g.out_plane();
        if (cnt > 1) {
          gather(x->value.data(), n0, cnt, cin, g.out_plane(), block.data());
          xptr = block.data();
        }
        MapMat(w->grad_buffer().data(), cin, static_cast<Eigen::Index>(g.rows())).noalias() +=
            CMapMat(xptr, cin, m) * cm.transpose();
      }
      if (x->requires_grad) {
        MapMat(block.data(), cin, m).noalias() = wm * cm;
        scatter(block.data(), n0, cnt, cin, g.out_plane(), x->grad_buffer().data(), true);
      }
    }
    if (bias && bias->requires_grad) bias_grad(gy, bias->grad_buffer());
  });
}

Var batch_norm(const Var& x, const Var& gamma, const Var& beta, Tensor& running_mean, Tensor& running_var,
               bool training, Real momentum, Real eps) {
  const Shape s = x->value.shape();
  const int c = s.c;
  require(gamma->value.numel() == static_cast<std::size_t>(c) && beta->value.numel() == static_cast<std::size_t>(c) &&
              running_mean.numel() == static_cast<std::size_t>(c) && running_var.numel() == static_cast<std::size_t>(c),
          "batch_norm: parameter size does not match " + std::to_string(c) + " channels");
  const std::size_t plane = s.plane();
  const std::size_t count = static_cast<std::size_t>(s.n) * plane;
  if (training) require(count > 1, "batch_norm: training needs more than one value per channel");

  std::vector<Real> mean(c), invstd(c);
  for (int ch = 0; ch < c; ++ch) {
    if (training) {
      double sum = 0;
      for (int n = 0; n < s.n; ++n) {
        const Real* p = x->value.data() + (static_cast<std::size_t>(n) * c + ch) * plane;
        for (std::size_t i = 0; i < plane; ++i) sum += p[i];
      }
      const double mu = sum / count;
      double sq = 0;
      for (int n = 0; n < s.n; ++n) {
        const Real* p = x->value.data() + (static_cast<std::size_t>(n) * c + ch) * plane;
        for (std::size_t i = 0; i < plane; ++i) sq += (p[i] - mu) * (p[i] - mu);
      }
      const double var = sq / count;
      mean[ch] = static_cast<Real>(mu);
      invstd[ch] = static_cast<Real>(1.0 / std::sqrt(var + eps));
      running_mean[ch] = (1 - momentum) * running_mean[ch] + momentum * static_cast<Real>(mu);
      running_var[ch] = (1 - momentum) * running_var[ch] + momentum * static_cast<Real>(sq / (count - 1));
    } else {
      mean[ch] = running_mean[ch];
      invstd[ch] = static_cast<Real>(1.0 / std::sqrt(static_cast<double>(running_var[ch]) + eps));
    }
  }

  Tensor y(s);
  for (int n = 0; n < s.n; ++n)
    for (int ch = 0; ch < c; ++ch) {
      const std::size_t off = (static_cast<std::size_t>(n) * c + ch) * plane;
      const Real a = gamma->value[ch] * invstd[ch];
      const Real b = beta->value[ch] - mean[ch] * a;
      const Real* p = x->value.data() + off;
      Real* q = y.data() + off;
      for (std::size_t i = 0; i < plane; ++i) q[i] = p[i] * a + b;
    }

  return make_result(std::move(y), {x, gamma, beta}, [x, gamma, beta, mean, invstd, training](Node& self) {
    const Shape s = x->value.shape();
    const int c = s.c;
    const std::size_t plane = s.plane();
    const Real inv_count = Real(1) / static_cast<Real>(static_cast<std::size_t>(s.n) * plane);
    for (int ch = 0; ch < c; ++ch) {
      double sum_dy = 0, sum_dy_xhat = 0;
      for (int n = 0; n < s.n; ++n) {
        const std::size_t off = (static_cast<std::size_t>(n) * c + ch) * plane;
        const Real* dy = self.grad.data() + off;
        const Real* p = x->value.data() + off;
        for (std::size_t i = 0; i < plane; ++i) {
          sum_dy += dy[i];
          sum_dy_xhat += dy[i] * (p[i] - mean[ch]) * invstd[ch];
        }
      }
      if (gamma->requires_grad) gamma->grad_buffer()[ch] += static_cast<Real>(sum_dy_xhat);
      if (beta->requires_grad) beta->grad_buffer()[ch] += static_cast<Real>(sum_dy);
      if (!x->requires_grad) continue;
      const Real g = gamma->value[ch] * invstd[ch];
      const Real mdy = static_cast<Real>(sum_dy) * inv_count;
      const Real mdyx = static_cast<Real>(sum_dy_xhat) * inv_count;
      for (int n = 0; n < s.n; ++n) {
        const std::size_t off = (static_cast<std::size_t>(n) * c + ch) * plane;
        const Real* dy = self.grad.data() + off;
        const Real* p = x->value.data() + off;
        Real* dx = x->grad_buffer().data() + off;
        if (training) {
          for (std::size_t i = 0; i < plane; ++i) {
            const Real xhat = (p[i] - mean[ch]) * invstd[ch];
            dx[i] += g * (dy[i] - mdy - xhat * mdyx);
          }
        } else {
          for (std::size_t i = 0; i < plane; ++i) dx[i] += g * dy[i];
        }
      }
    }
  });
}

Var relu(const Var& x) {
  Tensor y = x->value;
  for (auto& v : y.vec()) v = v > 0 ? v : Real(0);
  return make_result(std::move(y), {x}, [x](Node& self) {
    auto& gx = x->grad_buffer();
    for (std::size_t i = 0; i < gx.numel(); ++i)
      if (self.value[i] > 0) gx[i] += self.grad[i];
  });
}

Var sigmoid(const Var& x) {
  Tensor y = x->value;
  for (auto& v : y.vec()) v = Real(1) / (Real(1) + std::exp(-v));
  return make_result(std::move(y), {x}, [x](Node& self) {
    auto& gx = x->grad_buffer();
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += self.grad[i] * self.value[i] * (1 - self.value[i]);
  });
}

Var hard_sigmoid(const Var& x) {
  Tensor y = x->value;
  for (auto& v : y.vec()) v = std::clamp(Real(0.5) + v / 4, Real(0), Real(1));
  return make_result(std::move(y), {x}, [x](Node& self) {
    auto& gx = x->grad_buffer();
    for (std::size_t i = 0; i < gx.numel(); ++i) {
      const Real v = self.value[i];
      if (v > 0 && v < 1) gx[i] += self.grad[i] / 4;
    }
  });
}

Var add(const Var& a, const Var& b) {
  require(a->value.shape() == b->value.shape(),
          "add: shape mismatch " + a->value.shape().str() + " vs " + b->value.shape().str());
  Tensor y = a->value;
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] += b->value[i];
  return make_result(std::move(y), {a, b}, [a, b](Node& self) {
    for (const auto& p : {a, b}) {
      if (!p->requires_grad) continue;
      auto& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
    }
  });
}

Var concat(const std::vector<Var>& xs) {
  require(!xs.empty(), "concat: no inputs");
  const Shape s0 = xs[0]->value.shape();
  int c = 0;
  for (const auto& x : xs) {
    const Shape s = x->value.shape();
    require(s.n == s0.n && s.h == s0.h && s.w == s0.w,
            "concat: extent mismatch " + s0.str() + " vs " + s.str());
    c += s.c;
  }
  Tensor y(Shape{s0.n, c, s0.h, s0.w});
  const std::size_t plane = s0.plane();
  for (int n = 0; n < s0.n; ++n) {
    Real* dst = y.data() + static_cast<std::size_t>(n) * c * plane;
    for (const auto& x : xs) {
      const std::size_t len = static_cast<std::size_t>(x->value.shape().c) * plane;
      const Real* src = x->value.data() + n * len;
      dst = std::copy(src, src + len, dst);
    }
  }
  return make_result(std::move(y), xs, [xs, c](Node& self) {
    const Shape s0 = xs[0]->value.shape();
    const std::size_t plane = s0.plane();
    for (int n = 0; n < s0.n; ++n) {
      const Real* src = self.grad.data() + static_cast<std::size_t>(n) * c * plane;
      for (const auto& x : xs) {
        const std::size_t len = static_cast<std::size_t>(x->value.shape().c) * plane;
        if (x->requires_grad) {
          Real* dst = x->grad_buffer().data() + n * len;
          for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
        }
        src += len;
      }
    }
  });
}

Var max_pool2d(const Var& x, int kernel, int stride, int padding, bool ceil_mode) {
  const Shape s = x->value.shape();
  require(kernel >= 1 && stride >= 1 && padding >= 0 && 2 * padding <= kernel, "max_pool2d: bad parameters");
  auto out_size = [&](int in) {
    const int span = in + 2 * padding - kernel;
    int o = (ceil_mode ? ceil_div(span, stride) : span / stride) + 1;
    if (ceil_mode && (o - 1) * stride >= in + padding) --o;
    return o;
  };
  const int ho = out_size(s.h);
  const int wo = out_size(s.w);
  require(ho > 0 && wo > 0, "max_pool2d: empty output for " + s.str());
  Tensor y(Shape{s.n, s.c, ho, wo});
  std::vector<std::uint32_t> argmax(y.numel());
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const std::size_t in_off = (static_cast<std::size_t>(n) * s.c + c) * s.plane();
      const std::size_t out_off = (static_cast<std::size_t>(n) * s.c + c) * ho * wo;
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) {
          Real best = -std::numeric_limits<Real>::infinity();
          std::uint32_t arg = 0;
          for (int ky = 0; ky < kernel; ++ky) {
            const int iy = oy * stride - padding + ky;
            if (iy < 0 || iy >= s.h) continue;
            for (int kx = 0; kx < kernel; ++kx) {
              const int ix = ox * stride - padding + kx;
              if (ix < 0 || ix >= s.w) continue;
              const Real v = x->value[in_off + static_cast<std::size_t>(iy) * s.w + ix];
              if (v > best) {
                best = v;
                arg = static_cast<std::uint32_t>(iy * s.w + ix);
              }
            }
          }
          const std::size_t o = out_off + static_cast<std::size_t>(oy) * wo + ox;
          y[o] = best;
          argmax[o] = arg;
        }
    }
  return make_result(std::move(y), {x}, [x, argmax = std::move(argmax)](Node& self) {
    const Shape s = x->value.shape();
    const Shape ys = self.value.shape();
    auto& gx = x->grad_buffer();
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c) {
        const std::size_t in_off = (static_cast<std::size_t>(n) * s.c + c) * s.plane();
        const std::size_t out_off = (static_cast<std::size_t>(n) * s.c + c) * ys.plane();
        for (std::size_t i = 0; i < ys.plane(); ++i) gx[in_off + argmax[out_off + i]] += self.grad[out_off + i];
      }
  });
}

Var global_avg_pool(const Var& x) {
  const Shape s = x->value.shape();
  Tensor y(Shape{s.n, s.c, 1, 1});
  const std::size_t plane = s.plane();
  for (std::size_t i = 0; i < y.numel(); ++i) {
    const Real* p = x->value.data() + i * plane;
    double acc = 0;
    for (std::size_t j = 0; j < plane; ++j) acc += p[j];
    y[i] = static_cast<Real>(acc / static_cast<double>(plane));
  }
  return make_result(std::move(y), {x}, [x](Node& self) {
    const std::size_t plane = x->value.shape().plane();
    auto& gx = x->grad_buffer();
    for (std::size_t i = 0; i < self.grad.numel(); ++i) {
      const Real g = self.grad[i] / static_cast<Real>(plane);
      for (std::size_t j = 0; j < plane; ++j) gx[i * plane + j] += g;
    }
  });
}

Var broadcast_spatial(const Var& x, int h, int w) {
  const Shape s = x->value.shape();
  require(s.h == 1 && s.w == 1, "broadcast_spatial: expects N x C x 1 x 1, got " + s.str());
  Tensor y(Shape{s.n, s.c, h, w});
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (std::size_t i = 0; i < x->value.numel(); ++i)
    std::fill(y.data() + i * plane, y.data() + (i + 1) * plane, x->value[i]);
  return make_result(std::move(y), {x}, [x, plane](Node& self) {
    auto& gx = x->grad_buffer();
    for (std::size_t i = 0; i < gx.numel(); ++i) {
      double acc = 0;
      for (std::size_t j = 0; j < plane; ++j) acc += self.grad[i * plane + j];
      gx[i] += static_cast<Real>(acc);
    }
  });
}

namespace {

struct Lerp {
  int i0, i1;
  Real f;
};

std::vector<Lerp> lerp_table(int in, int out) {
  std::vector<Lerp> t(out);
  const double scale = out > 1 ? static_cast<double>(in - 1) / (out - 1) : 0.0;
  for (int o = 0; o < out; ++o) {
    const double src = o * scale;
    const int i0 = std::min(static_cast<int>(src), in - 1);
    const int i1 = std::min(i0 + 1, in - 1);
    t[o] = {i0, i1, static_cast<Real>(src - i0)};
  }
  return t;
}

}  // namespace

Var upsample_bilinear(const Var& x, int h, int w) {
  const Shape s = x->value.shape();
  require(h > 0 && w > 0, "upsample_bilinear: empty output");
  const auto ty = lerp_table(s.h, h);
  const auto tx = lerp_table(s.w, w);
  Tensor y(Shape{s.n, s.c, h, w});
  for (int nc = 0; nc < s.n * s.c; ++nc) {
    const Real* p = x->value.data() + static_cast<std::size_t>(nc) * s.plane();
    Real* q = y.data() + static_cast<std::size_t>(nc) * h * w;
    for (int oy = 0; oy < h; ++oy) {
      const auto& ly = ty[oy];
      const Real* r0 = p + static_cast<std::size_t>(ly.i0) * s.w;
      const Real* r1 = p + static_cast<std::size_t>(ly.i1) * s.w;
      for (int ox = 0; ox < w; ++ox) {
        const auto& lx = tx[ox];
        const Real top = r0[lx.i0] + (r0[lx.i1] - r0[lx.i0]) * lx.f;
        const Real bot = r1[lx.i0] + (r1[lx.i1] - r1[lx.i0]) * lx.f;
        q[static_cast<std::size_t>(oy) * w + ox] = top + (bot - top) * ly.f;
      }
    }
  }
  return make_result(std::move(y), {x}, [x, ty, tx, h, w](Node& self) {
    const Shape s = x->value.shape();
    auto& gx = x->grad_buffer();
    for (int nc = 0; nc < s.n * s.c; ++nc) {
      Real* p = gx.data() + static_cast<std::size_t>(nc) * s.plane();
      const Real* q = self.grad.data() + static_cast<std::size_t>(nc) * h * w;
      for (int oy = 0; oy < h; ++oy) {
        const auto& ly = ty[oy];
        for (int ox = 0; ox < w; ++ox) {
          const auto& lx = tx[ox];
          const Real g = q[static_cast<std::size_t>(oy) * w + ox];
          p[static_cast<std::size_t>(ly.i0) * s.w + lx.i0] += g * (1 - ly.f) * (1 - lx.f);
          p[static_cast<std::size_t>(ly.i0) * s.w + lx.i1] += g * (1 - ly.f) * lx.f;
          p[static_cast<std::size_t>(ly.i1) * s.w + lx.i0] += g * ly.f * (1 - lx.f);
          p[static_cast<std::size_t>(ly.i1) * s.w + lx.i1] += g * ly.f * lx.f;
        }
      }
    }
  });
}

Var mse_loss(const Var& pred, const Tensor& target) {
  require(pred->value.shape() == target.shape(),
          "mse_loss: shape mismatch " + pred->value.shape().str() + " vs " + target.shape().str());
  double acc = 0;
  for (std::size_t i = 0; i < target.numel(); ++i) {
    const double d = static_cast<double>(pred->value[i]) - target[i];
    acc += d * d;
  }
  Tensor y(Shape{1, 1, 1, 1}, static_cast<Real>(acc / static_cast<double>(target.numel())));
  return make_result(std::move(y), {pred}, [pred, target](Node& self) {
    auto& g = pred->grad_buffer();
    const Real scale = 2 * self.grad[0] / static_cast<Real>(target.numel());
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += scale * (pred->value[i] - target[i]);
  });
}

}  // namespace pmnet::nn::inline PMNET_NN_ABI
