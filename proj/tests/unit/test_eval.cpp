#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pmnet/common/random.hpp"
#include "pmnet/dataset/builder.hpp"
#include "pmnet/eval/metrics.hpp"
#include "pmnet/eval/predictors.hpp"
#include "pmnet/eval/render.hpp"

using namespace pmnet;
using namespace pmnet::eval;

namespace {

NormalizedMap from_rows(const std::vector<std::vector<double>>& rows) {
  NormalizedMap m(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) m.at(x, y) = rows[y][x];
  return m;
}

pmnet::testing::Grid to_grid(const NormalizedMap& m) {
  pmnet::testing::Grid g(m.height, std::vector<double>(m.width));
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) g[y][x] = m.at(x, y);
  return g;
}

// Random map with gray-quantized values and some building pixels.
NormalizedMap random_map(Rng& rng, int n, double building_share = 0.25) {
  NormalizedMap m(n, n);
  for (auto& v : m.values)
    v = rng.uniform(0.0, 1.0) < building_share ? 0.0 : static_cast<double>(rng.uniform_int(1, 255)) / 255.0;
  return m;
}

}  // namespace

TEST(Rmse, Examples) {
  EXPECT_EQ(rmse(from_rows({{0.2, 0.4}}), from_rows({{0.2, 0.4}})), 0.0);
  EXPECT_NEAR(rmse(from_rows({{0.5, 0.5}}), from_rows({{0.2, 0.1}})), std::sqrt((0.09 + 0.16) / 2), 1e-12);
  EXPECT_THROW(rmse(NormalizedMap(2, 2), NormalizedMap(3, 2)), std::invalid_argument);
}

TEST(Rmse, SymmetricAndTriangle) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_map(rng, 6), b = random_map(rng, 6), c = random_map(rng, 6);
    EXPECT_DOUBLE_EQ(rmse(a, b), rmse(b, a));
    EXPECT_LE(rmse(a, c), rmse(a, b) + rmse(b, c) + 1e-12);
  }
}

TEST(RoiError, Examples) {
  // gt has two building pixels; pred misses one and invents one
  const auto gt = from_rows({{0, 0, 0.5, 0.5}});
  EXPECT_EQ(roi_segmentation_error(gt, gt), 0.0);
  EXPECT_DOUBLE_EQ(roi_segmentation_error(from_rows({{0, 0.3, 0.5, 0}}), gt), 1.0);
  EXPECT_DOUBLE_EQ(roi_segmentation_error(from_rows({{0, 0.3, 0.5, 0.5}}), gt), 0.5);
  // threshold sits at half a gray level
  EXPECT_EQ(roi_segmentation_error(from_rows({{0.4 / 255, 0.6 / 255, 0.5, 0.5}}), gt), 0.5);
}

TEST(RoiError, NoGroundTruthBuildings) {
  const auto gt = from_rows({{0.5, 0.5}});
  EXPECT_EQ(roi_segmentation_error(gt, gt), 0.0);
  EXPECT_TRUE(std::isnan(roi_segmentation_error(from_rows({{0.0, 0.5}}), gt)));
}

TEST(ChannelError, Examples) {
  const auto gt = from_rows({{0, 100.0 / 255, 200.0 / 255}});
  EXPECT_EQ(channel_prediction_error(gt, gt), 0.0);
  const auto pred = from_rows({{0.5, 110.0 / 255, 0.0}});
  // intersection: only the middle pixel is RoI in both
  EXPECT_NEAR(channel_prediction_error(pred, gt), 10.0, 1e-9);
  // gt RoI: the third pixel counts, predicted at -255 dBm against -55
  EXPECT_NEAR(channel_prediction_error(pred, gt, RoiMode::GroundTruth), std::sqrt((100.0 + 200.0 * 200.0) / 2), 1e-9);
  EXPECT_TRUE(std::isnan(channel_prediction_error(from_rows({{0.0}}), from_rows({{0.0}}))));
}

TEST(Metrics, MatchOracles) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_map(rng, 8), b = random_map(rng, 8);
    EXPECT_NEAR(rmse(a, b), pmnet::testing::rmse_oracle(to_grid(a), to_grid(b)), 1e-12);
    const double r = roi_segmentation_error(a, b), ro = pmnet::testing::roi_error_oracle(to_grid(a), to_grid(b));
    if (std::isnan(ro)) EXPECT_TRUE(std::isnan(r));
    else EXPECT_NEAR(r, ro, 1e-12);
    for (bool gt_only : {false, true}) {
      const double c = channel_prediction_error(a, b, gt_only ? RoiMode::GroundTruth : RoiMode::Intersection);
      const double co = pmnet::testing::channel_error_oracle(to_grid(a), to_grid(b), gt_only);
      if (std::isnan(co)) EXPECT_TRUE(std::isnan(c));
      else EXPECT_NEAR(c, co, 1e-9);
    }
  }
}

TEST(Metrics, PoisonedPredictionIsNotHidden) {
  const auto gt = from_rows({{0.0, 0.5}});
  auto pred = gt;
  pred.at(1, 0) = std::nan("");
  EXPECT_TRUE(std::isnan(rmse(pred, gt)));
}

TEST(Quantize, RoundTripWithinHalfLevel) {
  Rng rng(3);
  NormalizedMap m(16, 16);
  for (auto& v : m.values) v = rng.uniform(0.0, 1.0);
  const auto back = normalize(quantize(m));
  for (std::size_t i = 0; i < m.values.size(); ++i) EXPECT_LE(std::abs(back.values[i] - m.values[i]) * 255, 0.5 + 1e-9);
  NormalizedMap out(2, 1);
  out.values = {-0.2, 1.3};
  EXPECT_EQ(quantize(out).pixels, (std::vector<std::uint8_t>{0, 255}));
}

TEST(Latency, NearestRankPercentiles) {
  std::vector<double> s;
  for (int i = 1; i <= 100; ++i) s.push_back(i);
  const auto st = latency_stats(s);
  EXPECT_EQ(st.p50_ms, 50);
  EXPECT_EQ(st.p95_ms, 95);
  EXPECT_DOUBLE_EQ(st.mean_ms, 50.5);
  EXPECT_EQ(latency_stats({7.0}).p95_ms, 7.0);
  EXPECT_EQ(latency_stats({3.0, 1.0, 2.0}).p50_ms, 2.0);
}

namespace {

std::vector<dataset::GraySample> small_samples(int n) {
  auto sc = dataset::scenario_preset("urban_a");
  sc.map.size = 32;
  sc.map.block_min = 4;
  sc.map.block_max = 8;
  sc.tx_margin = 2;
  sc.n_maps = n;
  sc.generator = "3gpp";
  std::vector<dataset::GraySample> out;
  for (const auto& s : dataset::generate_scenes(sc)) out.push_back(dataset::make_sample(s));
  return out;
}

}  // namespace

TEST(Evaluate, GroundTruthScoresZero) {
  const auto samples = small_samples(3);
  const auto report = evaluate([](const dataset::GraySample& s) { return normalize(s.target); }, samples, "gt", "t");
  EXPECT_EQ(report.n, 3);
  EXPECT_EQ(report.rmse, 0.0);
  EXPECT_EQ(report.roi_err, 0.0);
  EXPECT_EQ(report.chan_err_db, 0.0);
  EXPECT_EQ(report.per_sample.size(), 3u);
  const auto csv = per_sample_csv(report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sample_id,rmse,roi_err,chan_err_db,latency_ms");
  EXPECT_EQ(to_json(report).at("n"), 3);
}

TEST(Evaluate, BaselineReproducesThreeGppTargets) {
  const auto samples = small_samples(2);
  const auto sc = dataset::scenario_preset("urban_a");
  const auto report = evaluate(baseline_predictor("3gpp", sc.propagation), samples, "3gpp", "t");
  EXPECT_EQ(report.rmse, 0.0);
}

TEST(Evaluate, Deterministic) {
  const auto samples = small_samples(2);
  model::PmnetConfig cfg = model::PmnetConfig::desk();
  cfg.input_size = 32;
  cfg.base_width = 4;
  cfg.block_counts = {1, 1, 1, 1};
  model::PmnetModel net(cfg);
  const auto a = evaluate(model_predictor(net), samples, "m", "t");
  const auto b = evaluate(model_predictor(net), samples, "m", "t");
  EXPECT_EQ(a.rmse, b.rmse);
  EXPECT_EQ(a.roi_err, b.roi_err);
  EXPECT_GT(a.rmse, 0.0);
}

TEST(Render, ConstantAndPurity) {
  const GrayImage g(4, 4, 200);
  const auto a = render_gray(g), b = render_gray(g);
  EXPECT_EQ(a.pixels, b.pixels);
  for (std::size_t i = 0; i < a.pixels.size(); ++i) EXPECT_EQ(a.pixels[i], a.pixels[i % 3]);
  GrayImage with_building = g;
  with_building.at(0, 0) = 0;
  const auto r = render_gray(with_building);
  EXPECT_EQ(r.pixels[0] + r.pixels[1] + r.pixels[2], 0);
}

TEST(Render, DifferenceOfEqualIsMidGray) {
  GrayImage g(5, 5, 90);
  g.at(2, 2) = 0;
  const auto d = render_difference(g, g);
  for (auto v : d.pixels) EXPECT_EQ(v, 128);
  GrayImage hi = g;
  hi.at(1, 1) = 200;
  const auto e = render_difference(hi, g);
  const auto i = (1 * 5 + 1) * 3;
  EXPECT_GT(e.pixels[i], e.pixels[i + 2]);  // over-prediction leans red
  const auto s = side_by_side({d, e});
  EXPECT_EQ(s.width, 5 + 4 + 5);
  EXPECT_EQ(s.height, 5);
}
