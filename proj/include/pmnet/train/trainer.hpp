#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmnet/dataset/builder.hpp"
#include "pmnet/model/pmnet.hpp"

namespace pmnet::train {

struct TrainConfig {
  double lr_initial = 1e-3;
  double lr_gamma = 0.5;
  int lr_step_epochs = 10;
  int batch_size = 16;
  int epochs = 50;
  std::uint64_t seed = 0;
  double weight_decay = 0.0;
  /// Validation probe every K optimizer steps (and at step 0); 0 disables.
  int probe_every = 20;
  /// Probes use at most this many validation samples (0: all of them).
  int probe_samples = 0;
  /// Stop once a probe reaches this validation RMSE (0: never).
  double stop_at_val_rmse = 0.0;
  /// Parameter name prefixes kept fixed (e.g. "e1", "e2"); empty trains all.
  std::vector<std::string> freeze_prefixes;
  /// Draw a random rotation or flip (identity included) for every training
  /// sample each time it enters a batch.
  bool random_transforms = false;

  /// Throws std::invalid_argument unless epochs >= 1, batch_size >= 1, lr > 0.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct StepRecord {
  long long step = 0;
  double train_mse = 0.0;
};

struct EpochRecord {
  int epoch = 0;  ///< 1-based
  long long end_step = 0;
  double lr = 0.0;
  double train_mse = 0.0;  ///< mean over the epoch's batches
  double val_mse = 0.0;
  double val_rmse = 0.0;   ///< mean per-sample RMSE
};

struct ProbeRecord {
  long long step = 0;
  double val_mse = 0.0;
  double val_rmse = 0.0;
};

struct TrainRun {
  std::vector<StepRecord> step_history;
  std::vector<EpochRecord> epoch_history;
  std::vector<ProbeRecord> probes;
  std::vector<model::Tensor> best_state;  ///< parameters at the best epoch
  int best_epoch = 0;
  double best_val_mse = 0.0;
  long long steps = 0;
  bool stopped_early = false;
  double wall_time_s = 0.0;
};

/// Non-finite training loss. what() carries step, epoch and recent losses.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean squared error over all pixels, building pixels included.
double mse_loss(const model::Tensor& pred, const model::Tensor& target);

/// Validation MSE and mean per-sample RMSE in inference mode.
std::pair<double, double> validate(const model::PmnetModel& model, const std::vector<dataset::GraySample>& val,
                                   int max_samples = 0);

using ProgressFn = std::function<void(const std::string&)>;

/// Adam with a step schedule (lr x gamma every lr_step_epochs), validation
/// each epoch, probes every probe_every steps. The model ends holding the
/// best epoch's parameters. Deterministic for a fixed seed.
///
/// Throws std::invalid_argument on empty splits or size mismatch and
/// DivergenceError on a non-finite loss.
TrainRun train(model::PmnetModel& model, const dataset::SampleSet& train_set, const dataset::SampleSet& val_set,
               const TrainConfig& cfg, const ProgressFn& progress = {});

/// Initializes from the checkpoint (when given), keeps a map-exclusive
/// `fraction` of the training split and runs train(). The validation split
/// is used as is.
TrainRun finetune(model::PmnetModel& model, const std::optional<std::filesystem::path>& pretrained,
                  const dataset::SampleSet& train_set, const dataset::SampleSet& val_set, double fraction,
                  const TrainConfig& cfg, const ProgressFn& progress = {});

/// First probe step whose validation RMSE is <= each threshold; nullopt
/// when never reached. Counts are optimizer steps.
std::map<double, std::optional<long long>> steps_to_threshold(const TrainRun& run,
                                                              const std::vector<double>& thresholds);

/// Writes config.json, metrics.csv (step,split,metric,value),
/// checkpoints/best.ckpt and report.json under dir. `extra` is recorded in
/// all three JSON outputs, including the checkpoint metadata.
void write_run_dir(const std::filesystem::path& dir, const model::PmnetModel& model, const TrainConfig& cfg,
                   const TrainRun& run, const nlohmann::json& extra = nlohmann::json::object());

}  // namespace pmnet::train
