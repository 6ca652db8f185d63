#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pmnet/eval/metrics.hpp"
#include "pmnet/train/trainer.hpp"

namespace pmnet::train {

/// A starting point for the sweep: random init (no checkpoint) or a
/// pre-trained checkpoint.
struct SweepOption {
  std::string label;
  std::optional<std::filesystem::path> pretrained;
};

struct SweepRow {
  std::string label;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  eval::MetricReport report;  ///< final model on the validation split
  long long steps = 0;
  std::map<double, std::optional<long long>> steps_to;
};

/// One finetune per (option, fraction, seed); the model config's init seed
/// is set from the run seed. Each final model is evaluated on val_set.
std::vector<SweepRow> data_fraction_sweep(const model::PmnetConfig& model_cfg, const std::vector<SweepOption>& options,
                                          const dataset::SampleSet& train_set, const dataset::SampleSet& val_set,
                                          const std::vector<double>& fractions, const TrainConfig& cfg,
                                          const std::vector<std::uint64_t>& seeds,
                                          const std::vector<double>& thresholds = {0.1, 0.03},
                                          const ProgressFn& progress = {});

/// label,fraction,seed,n_train,rmse,roi_err,chan_err_db,steps,steps_to_<t>...
std::string sweep_csv(const std::vector<SweepRow>& rows);
/// Line chart of mean validation RMSE against fraction, one line per label.
std::string sweep_svg(const std::vector<SweepRow>& rows);

}  // namespace pmnet::train
