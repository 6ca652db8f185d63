#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmnet/common/image.hpp"
#include "pmnet/dataset/sample.hpp"

namespace pmnet::eval {

/// A pathloss map scaled to [0, 1] (gray / 255). Building pixels are 0.
struct NormalizedMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  NormalizedMap() = default;
  NormalizedMap(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

NormalizedMap normalize(const GrayImage& gray);
/// Rounds to the nearest gray level, clamped to [0, 255].
GrayImage quantize(const NormalizedMap& map);

/// A pixel is classified as building iff its normalized value is below
/// this (it would round to gray 0).
inline constexpr double kBuildingThreshold = 0.5 / 255.0;
inline bool is_building(double normalized) { return normalized < kBuildingThreshold; }

/// sqrt(mean((pred - gt)^2)) over every pixel. Throws std::invalid_argument
/// on a shape mismatch.
double rmse(const NormalizedMap& pred, const NormalizedMap& gt);

/// (pixels misclassified in either direction) / (ground-truth building
/// pixels). With no building pixels in gt: 0 if nothing is misclassified,
/// NaN otherwise.
double roi_segmentation_error(const NormalizedMap& pred, const NormalizedMap& gt);

enum class RoiMode {
  Intersection,  ///< RoI in both prediction and ground truth
  GroundTruth,   ///< RoI of the ground truth only
};

/// RMSE in dB over RoI pixels, values converted with gray - 255 (continuous
/// for predictions: 255 * v - 255). NaN when no pixel qualifies.
double channel_prediction_error(const NormalizedMap& pred, const NormalizedMap& gt,
                                RoiMode mode = RoiMode::Intersection);

struct LatencyStats {
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double mean_ms = 0.0;
};

/// Nearest-rank percentiles.
LatencyStats latency_stats(std::vector<double> samples_ms);

struct SampleMetrics {
  std::string sample_id;
  double rmse = 0.0;
  double roi_err = 0.0;
  double chan_err_db = 0.0;
  double latency_ms = 0.0;
};

/// Dataset-level report. Averages are over samples; samples whose metric is
/// degenerate (NaN) are left out of that average and counted.
struct MetricReport {
  std::string model_id;
  std::string dataset_id;
  double rmse = 0.0;       ///< normalized [0, 1]
  double rmse_gray = 0.0;  ///< same, in gray levels (x255)
  double roi_err = 0.0;
  double chan_err_db = 0.0;
  LatencyStats latency;
  int n = 0;
  int n_degenerate_roi = 0;
  int n_degenerate_chan = 0;
  RoiMode roi_mode = RoiMode::Intersection;
  std::vector<SampleMetrics> per_sample;
};

nlohmann::json to_json(const MetricReport& r);
/// Per-sample rows: sample_id,rmse,roi_err,chan_err_db,latency_ms
std::string per_sample_csv(const MetricReport& r);

/// Produces a normalized prediction for one sample.
using Predictor = std::function<NormalizedMap(const dataset::GraySample&)>;

/// Runs the predictor over every sample and aggregates the three metrics
/// against the sample targets. Latency covers the predictor call only.
MetricReport evaluate(const Predictor& predictor, const std::vector<dataset::GraySample>& samples,
                      const std::string& model_id, const std::string& dataset_id,
                      RoiMode mode = RoiMode::Intersection);

/// Summary over per-sample rows (used by evaluate and for merging).
MetricReport summarize(std::vector<SampleMetrics> rows, const std::string& model_id, const std::string& dataset_id,
                       RoiMode mode);

}  // namespace pmnet::eval
