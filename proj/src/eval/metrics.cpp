#include "pmnet/eval/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pmnet/dataset/gray.hpp"

namespace pmnet::eval {

namespace {

void check_shapes(const NormalizedMap& a, const NormalizedMap& b, const char* what) {
  if (a.width != b.width || a.height != b.height || a.values.size() != b.values.size())
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + std::to_string(a.width) + "x" +
                                std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                                std::to_string(b.height));
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

NormalizedMap normalize(const GrayImage& gray) {
  NormalizedMap m(gray.width, gray.height);
  for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = gray.pixels[i] / 255.0;
  return m;
}

GrayImage quantize(const NormalizedMap& map) {
  GrayImage g(map.width, map.height);
  for (std::size_t i = 0; i < map.values.size(); ++i)
    g.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(map.values[i] * 255.0), 0L, 255L));
  return g;
}

double rmse(const NormalizedMap& pred, const NormalizedMap& gt) {
  check_shapes(pred, gt, "rmse");
  if (gt.values.empty()) throw std::invalid_argument("rmse: empty maps");
  double acc = 0.0;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    const double d = pred.values[i] - gt.values[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(gt.values.size()));
}

double roi_segmentation_error(const NormalizedMap& pred, const NormalizedMap& gt) {
  check_shapes(pred, gt, "roi_segmentation_error");
  std::size_t errors = 0;
  std::size_t buildings = 0;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    const bool gb = is_building(gt.values[i]);
    buildings += gb;
    errors += gb != is_building(pred.values[i]);
  }
  if (buildings == 0) return errors == 0 ? 0.0 : kNaN;
  return static_cast<double>(errors) / static_cast<double>(buildings);
}

double channel_prediction_error(const NormalizedMap& pred, const NormalizedMap& gt, RoiMode mode) {
  check_shapes(pred, gt, "channel_prediction_error");
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    if (is_building(gt.values[i])) continue;
    if (mode == RoiMode::Intersection && is_building(pred.values[i])) continue;
    const double d = dataset::normalized_to_dbm(pred.values[i]) - dataset::normalized_to_dbm(gt.values[i]);
    acc += d * d;
    ++n;
  }
  return n == 0 ? kNaN : std::sqrt(acc / static_cast<double>(n));
}

LatencyStats latency_stats(std::vector<double> samples_ms) {
  LatencyStats s;
  if (samples_ms.empty()) return s;
  std::sort(samples_ms.begin(), samples_ms.end());
  auto rank = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples_ms.size())));
    return samples_ms[std::clamp<std::size_t>(k, 1, samples_ms.size()) - 1];
  };
  s.p50_ms = rank(0.5);
  s.p95_ms = rank(0.95);
  double sum = 0.0;
  for (double v : samples_ms) sum += v;
  s.mean_ms = sum / static_cast<double>(samples_ms.size());
  return s;
}

nlohmann::json to_json(const MetricReport& r) {
  return {{"model_id", r.model_id},
          {"dataset_id", r.dataset_id},
          {"rmse", r.rmse},
          {"rmse_gray", r.rmse_gray},
          {"roi_err", r.roi_err},
          {"chan_err_db", r.chan_err_db},
          {"latency_ms", {{"p50", r.latency.p50_ms}, {"p95", r.latency.p95_ms}, {"mean", r.latency.mean_ms}}},
          {"n", r.n},
          {"n_degenerate_roi", r.n_degenerate_roi},
          {"n_degenerate_chan", r.n_degenerate_chan},
          {"roi_mode", r.roi_mode == RoiMode::Intersection ? "intersection" : "ground_truth"}};
}

std::string per_sample_csv(const MetricReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << "sample_id,rmse,roi_err,chan_err_db,latency_ms\n";
  for (const auto& s : r.per_sample)
    os << s.sample_id << ',' << s.rmse << ',' << s.roi_err << ',' << s.chan_err_db << ',' << s.latency_ms << '\n';
  return os.str();
}

MetricReport summarize(std::vector<SampleMetrics> rows, const std::string& model_id, const std::string& dataset_id,
                       RoiMode mode) {
  MetricReport r;
  r.model_id = model_id;
  r.dataset_id = dataset_id;
  r.roi_mode = mode;
  r.n = static_cast<int>(rows.size());
  double sum_rmse = 0.0, sum_roi = 0.0, sum_chan = 0.0;
  int n_roi = 0, n_chan = 0;
  std::vector<double> lat;
  for (const auto& s : rows) {
    sum_rmse += s.rmse;
    if (std::isnan(s.roi_err)) {
      ++r.n_degenerate_roi;
    } else {
      sum_roi += s.roi_err;
      ++n_roi;
    }
    if (std::isnan(s.chan_err_db)) {
      ++r.n_degenerate_chan;
    } else {
      sum_chan += s.chan_err_db;
      ++n_chan;
    }
    lat.push_back(s.latency_ms);
  }
  if (r.n > 0) r.rmse = sum_rmse / r.n;
  r.rmse_gray = 255.0 * r.rmse;
  r.roi_err = n_roi > 0 ? sum_roi / n_roi : kNaN;
  r.chan_err_db = n_chan > 0 ? sum_chan / n_chan : kNaN;
  r.latency = latency_stats(lat);
  r.per_sample = std::move(rows);
  return r;
}

MetricReport evaluate(const Predictor& predictor, const std::vector<dataset::GraySample>& samples,
                      const std::string& model_id, const std::string& dataset_id, RoiMode mode) {
  if (samples.empty()) throw std::invalid_argument("evaluate: no samples");
  std::vector<SampleMetrics> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto pred = predictor(s);
    const auto t1 = std::chrono::steady_clock::now();
    const auto gt = normalize(s.target);
    rows.push_back({s.sample_id, rmse(pred, gt), roi_segmentation_error(pred, gt),
                    channel_prediction_error(pred, gt, mode),
                    std::chrono::duration<double, std::milli>(t1 - t0).count()});
  }
  return summarize(std::move(rows), model_id, dataset_id, mode);
}

}  // namespace pmnet::eval
