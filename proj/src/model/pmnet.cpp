#include "pmnet/model/pmnet.hpp"

#include <sstream>

#include "pmnet/nn/ops.hpp"

namespace pmnet::model::inline PMNET_NN_ABI {

PmnetConfig PmnetConfig::desk() {
  PmnetConfig c;
  c.input_size = 128;
  c.base_width = 16;
  c.block_counts = {1, 1, 2, 1};
  return c;
}

void PmnetConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("PmnetConfig: " + m); };
  if (input_channels < 1 || output_channels < 1) fail("channel counts must be positive");
  if (output_stride != 8 && output_stride != 16) fail("output_stride must be 8 or 16");
  if (input_size < 32) fail("input_size must be at least 32");
  if (atrous_rates.empty()) fail("atrous_rates must not be empty");
  for (int r : atrous_rates)
    if (r < 1) fail("atrous rates must be >= 1");
  for (int g : multi_grids)
    if (g < 1) fail("multi-grid multipliers must be >= 1");
  if (block_counts.size() != 4) fail("block_counts needs 4 entries");
  for (int b : block_counts)
    if (b < 1) fail("block counts must be >= 1");
  if (base_width < 1) fail("base_width must be positive");
  if (output_activation != "hard_sigmoid" && output_activation != "sigmoid")
    fail("output_activation must be hard_sigmoid or sigmoid");
}

void to_json(nlohmann::json& j, const PmnetConfig& c) {
  j = nlohmann::json{{"input_channels", c.input_channels}, {"output_channels", c.output_channels},
                     {"input_size", c.input_size},         {"output_stride", c.output_stride},
                     {"atrous_rates", c.atrous_rates},     {"multi_grids", c.multi_grids},
                     {"block_counts", c.block_counts},     {"base_width", c.base_width},
                     {"init_seed", c.init_seed},           {"output_activation", c.output_activation}};
}

void from_json(const nlohmann::json& j, PmnetConfig& c) {
  if (j.value("profile", "") == "desk") c = PmnetConfig::desk();
  c.input_channels = j.value("input_channels", c.input_channels);
  c.output_channels = j.value("output_channels", c.output_channels);
  c.input_size = j.value("input_size", c.input_size);
  c.output_stride = j.value("output_stride", c.output_stride);
  c.atrous_rates = j.value("atrous_rates", c.atrous_rates);
  c.multi_grids = j.value("multi_grids", c.multi_grids);
  c.block_counts = j.value("block_counts", c.block_counts);
  c.base_width = j.value("base_width", c.base_width);
  c.init_seed = j.value("init_seed", c.init_seed);
  c.output_activation = j.value("output_activation", c.output_activation);
}

std::string format_shapes(const std::vector<StageShape>& shapes) {
  std::ostringstream os;
  for (const auto& s : shapes) os << "  " << s.stage << ": " << s.c << " x " << s.h << " x " << s.w << "\n";
  return os.str();
}

namespace {

int conv_res(int in, int k, int s, int p) { return (in + 2 * p - k) / s + 1; }

int pool_res(int in) {
  int o = (in + 2 - 3 + 1) / 2 + 1;  // ceil mode, kernel 3, stride 2, padding 1
  if ((o - 1) * 2 >= in + 1) --o;
  return o;
}

enum class Step { Same, Up };

// How a decoder stage reaches the skip resolution from the current one.
Step decoder_step(int cur, int skip, const std::string& stage, const std::vector<StageShape>& plan) {
  if (skip == cur) return Step::Same;
  if (skip == 2 * cur - 1) return Step::Up;
  throw ShapeError("PMNet: stage " + stage + " cannot reach skip resolution " + std::to_string(skip) + " from " +
                   std::to_string(cur) + "\nplanned shapes:\n" + format_shapes(plan));
}

struct Widths {
  int e1, e2, e3, e4, e5, e6;
};

Widths widths(int w) { return {w, 4 * w, 8 * w, 8 * w, 16 * w, 8 * w}; }

int e2_stride(const PmnetConfig& c) { return c.output_stride == 16 ? 2 : 1; }

}  // namespace

std::vector<StageShape> planned_shapes(const PmnetConfig& cfg) {
  cfg.validate();
  const auto ch = widths(cfg.base_width);
  const int s = cfg.input_size;
  std::vector<StageShape> plan{{"input", cfg.input_channels, s, s}};
  const int r1 = pool_res(conv_res(s, 7, 2, 3));
  const int r2 = conv_res(r1, 3, e2_stride(cfg), 1);
  const int r3 = conv_res(r2, 3, 2, 1);
  const int r4 = conv_res(r3, 3, 2, 1);
  plan.push_back({"E1", ch.e1, r1, r1});
  plan.push_back({"E2", ch.e2, r2, r2});
  plan.push_back({"E3", ch.e3, r3, r3});
  plan.push_back({"E4", ch.e4, r4, r4});
  plan.push_back({"E5", ch.e5, r4, r4});
  plan.push_back({"E6", ch.e6, r4, r4});

  const int w = cfg.base_width;
  int cur = r4;
  decoder_step(cur, r4, "D6", plan);
  plan.push_back({"D6", 8 * w + ch.e4, r4, r4});
  decoder_step(cur, r3, "D5", plan);
  cur = r3;
  plan.push_back({"D5", 8 * w + ch.e3, cur, cur});
  decoder_step(cur, r2, "D4", plan);
  cur = r2;
  plan.push_back({"D4", 4 * w + ch.e2, cur, cur});
  decoder_step(cur, r2, "D3", plan);
  plan.push_back({"D3", 4 * w + ch.e2, cur, cur});
  decoder_step(cur, r1, "D2", plan);
  cur = r1;
  plan.push_back({"D2", 4 * w + ch.e1, cur, cur});
  plan.push_back({"D1", 2 * w + cfg.input_channels, s, s});
  plan.push_back({"output", cfg.output_channels, s, s});
  return plan;
}

namespace {

struct ConvBn {
  nn::Conv2d conv;
  nn::BatchNorm2d bn;

  ConvBn() = default;
  ConvBn(nn::ParameterStore& ps, const std::string& name, int in, int out, int k, nn::Conv2dOptions o, Rng& rng)
      : conv(ps, name + ".conv", in, out, k, o, false, rng), bn(ps, name + ".bn", out) {}
  Var operator()(const Var& x, bool training, bool activate = true) const {
    auto y = bn(conv(x), training);
    return activate ? nn::relu(y) : y;
  }
};

struct Bottleneck {
  ConvBn a, b, c;
  bool has_down = false;
  ConvBn down;

  Bottleneck(nn::ParameterStore& ps, const std::string& name, int in, int out, int stride, int dilation, Rng& rng)
      : a(ps, name + ".a", in, out / 4, 1, {}, rng),
        b(ps, name + ".b", out / 4, out / 4, 3, {stride, dilation, dilation}, rng),
        c(ps, name + ".c", out / 4, out, 1, {}, rng) {
    if (in != out || stride != 1) {
      has_down = true;
      down = ConvBn(ps, name + ".down", in, out, 1, {stride, 0, 1}, rng);
    }
  }
  Var operator()(const Var& x, bool training) const {
    auto y = c(b(a(x, training), training), training, false);
    auto shortcut = has_down ? down(x, training, false) : x;
    return nn::relu(nn::add(y, shortcut));
  }
};

struct ResLayer {
  std::vector<Bottleneck> blocks;

  ResLayer(nn::ParameterStore& ps, const std::string& name, int n, int in, int out, int stride, int dilation,
           const std::vector<int>& grids, Rng& rng) {
    for (int i = 0; i < n; ++i) {
      const int mult = grids.empty() ? 1 : grids[i % grids.size()];
      blocks.emplace_back(ps, name + ".b" + std::to_string(i), i == 0 ? in : out, out, i == 0 ? stride : 1,
                          dilation * mult, rng);
    }
  }
  Var operator()(Var x, bool training) const {
    for (const auto& b : blocks) x = b(x, training);
    return x;
  }
};

// Decoder stage: conv (same resolution) or transposed conv (2n - 1), BN, ReLU.
struct DecoderStage {
  bool up = false;
  nn::Conv2d conv;
  nn::ConvTranspose2d tconv;
  nn::BatchNorm2d bn;

  DecoderStage(nn::ParameterStore& ps, const std::string& name, int in, int out, bool upsample, Rng& rng)
      : up(upsample), bn(ps, name + ".bn", out) {
    if (up)
      tconv = nn::ConvTranspose2d(ps, name + ".conv", in, out, 3, {2, 1, 0}, false, rng);
    else
      conv = nn::Conv2d(ps, name + ".conv", in, out, 3, {1, 1, 1}, false, rng);
  }
  Var operator()(const Var& x, bool training) const { return nn::relu(bn(up ? tconv(x) : conv(x), training)); }
};

}  // namespace

struct PmnetModel::Impl {
  ConvBn stem;
  std::vector<ResLayer> layers;  // E2..E5
  std::vector<ConvBn> aspp;      // 1x1 branch, then one per atrous rate
  nn::Conv2d pool_conv;
  ConvBn fuse;
  std::vector<DecoderStage> dec;  // D6, D5, D4, D3, D2, D1
  ConvBn head;
  nn::Conv2d out;
  std::vector<StageShape> plan;
};

PmnetModel::PmnetModel(const PmnetConfig& cfg) : cfg_(cfg) {
  auto impl = std::make_shared<Impl>();
  impl->plan = planned_shapes(cfg);
  const auto& plan = impl->plan;
  const auto ch = widths(cfg.base_width);
  const int w = cfg.base_width;
  Rng rng(cfg.init_seed);
  auto& ps = params_;

  impl->stem = ConvBn(ps, "e1", cfg.input_channels, ch.e1, 7, {2, 3, 1}, rng);
  const auto& bc = cfg.block_counts;
  impl->layers.emplace_back(ps, "e2", bc[0], ch.e1, ch.e2, e2_stride(cfg), 1, std::vector<int>{}, rng);
  impl->layers.emplace_back(ps, "e3", bc[1], ch.e2, ch.e3, 2, 1, std::vector<int>{}, rng);
  impl->layers.emplace_back(ps, "e4", bc[2], ch.e3, ch.e4, 2, 1, std::vector<int>{}, rng);
  impl->layers.emplace_back(ps, "e5", bc[3], ch.e4, ch.e5, 1, 2, cfg.multi_grids, rng);

  impl->aspp.emplace_back(ps, "e6.b0", ch.e5, ch.e6, 1, nn::Conv2dOptions{}, rng);
  for (std::size_t i = 0; i < cfg.atrous_rates.size(); ++i) {
    const int r = cfg.atrous_rates[i];
    impl->aspp.emplace_back(ps, "e6.b" + std::to_string(i + 1), ch.e5, ch.e6, 3, nn::Conv2dOptions{1, r, r}, rng);
  }
  impl->pool_conv = nn::Conv2d(ps, "e6.pool.conv", ch.e5, ch.e6, 1, {}, true, rng);
  impl->fuse = ConvBn(ps, "e6.fuse", ch.e6 * static_cast<int>(impl->aspp.size() + 1), ch.e6, 1, {}, rng);

  auto res = [&plan](const char* stage) {
    for (const auto& s : plan)
      if (s.stage == stage) return s.h;
    return 0;
  };
  impl->dec.emplace_back(ps, "d6", ch.e6, 8 * w, false, rng);
  impl->dec.emplace_back(ps, "d5", 8 * w + ch.e4, 8 * w, res("E3") != res("E4"), rng);
  impl->dec.emplace_back(ps, "d4", 8 * w + ch.e3, 4 * w, res("E2") != res("E3"), rng);
  impl->dec.emplace_back(ps, "d3", 4 * w + ch.e2, 4 * w, false, rng);
  impl->dec.emplace_back(ps, "d2", 4 * w + ch.e2, 4 * w, res("E1") != res("E2"), rng);
  impl->dec.emplace_back(ps, "d1", 4 * w + ch.e1, 2 * w, false, rng);
  impl->head = ConvBn(ps, "head", 2 * w + cfg.input_channels, w, 3, {1, 1, 1}, rng);
  impl->out = nn::Conv2d(ps, "head.out", w, cfg.output_channels, 1, {}, true, rng);
  impl_ = std::move(impl);
}

Var PmnetModel::forward(const Var& x, bool training, std::vector<StageShape>* trace) const {
  const Shape xs = x->value.shape();
  if (xs.c != cfg_.input_channels || xs.h != cfg_.input_size || xs.w != cfg_.input_size)
    throw std::invalid_argument("PMNet: expected N x " + std::to_string(cfg_.input_channels) + " x " +
                                std::to_string(cfg_.input_size) + " x " + std::to_string(cfg_.input_size) +
                                " input, got " + xs.str());
  const Impl& m = *impl_;
  auto record = [trace](const char* stage, const Var& v) {
    if (trace) {
      const auto& s = v->value.shape();
      trace->push_back({stage, s.c, s.h, s.w});
    }
  };
  record("input", x);
  auto e1 = nn::max_pool2d(m.stem(x, training), 3, 2, 1, true);
  record("E1", e1);
  auto e2 = m.layers[0](e1, training);
  record("E2", e2);
  auto e3 = m.layers[1](e2, training);
  record("E3", e3);
  auto e4 = m.layers[2](e3, training);
  record("E4", e4);
  auto e5 = m.layers[3](e4, training);
  record("E5", e5);

  std::vector<Var> branches;
  for (const auto& b : m.aspp) branches.push_back(b(e5, training));
  const auto& s5 = e5->value.shape();
  branches.push_back(
      nn::broadcast_spatial(nn::relu(m.pool_conv(nn::global_avg_pool(e5))), s5.h, s5.w));
  auto e6 = m.fuse(nn::concat(branches), training);
  record("E6", e6);

  auto d6 = nn::concat({m.dec[0](e6, training), e4});
  record("D6", d6);
  auto d5 = nn::concat({m.dec[1](d6, training), e3});
  record("D5", d5);
  auto d4 = nn::concat({m.dec[2](d5, training), e2});
  record("D4", d4);
  auto d3 = nn::concat({m.dec[3](d4, training), e2});
  record("D3", d3);
  auto d2 = nn::concat({m.dec[4](d3, training), e1});
  record("D2", d2);
  auto d1 = nn::concat({nn::upsample_bilinear(m.dec[5](d2, training), xs.h, xs.w), x});
  record("D1", d1);
  const auto z = m.out(m.head(d1, training));
  auto y = cfg_.output_activation == "sigmoid" ? nn::sigmoid(z) : nn::hard_sigmoid(z);
  record("output", y);
  return y;
}

Tensor PmnetModel::predict(const Tensor& x) const {
  nn::NoGradGuard guard;
  return forward(nn::constant(x), false)->value;
}

std::vector<Tensor> PmnetModel::snapshot() const {
  std::vector<Tensor> out;
  for (const auto& e : params_.entries()) out.push_back(e.var->value);
  return out;
}

void PmnetModel::restore(const std::vector<Tensor>& values) {
  const auto& entries = params_.entries();
  if (values.size() != entries.size()) throw std::invalid_argument("restore: tensor count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i].shape() == entries[i].var->value.shape()))
      throw std::invalid_argument("restore: shape mismatch for " + entries[i].name);
    entries[i].var->value = values[i];
  }
}

}  // namespace pmnet::model::inline PMNET_NN_ABI
