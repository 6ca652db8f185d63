#include "pmnet/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pmnet/common/random.hpp"
#include "pmnet/dataset/preprocess.hpp"
#include "pmnet/eval/metrics.hpp"
#include "pmnet/eval/predictors.hpp"
#include "pmnet/model/checkpoint.hpp"
#include "pmnet/nn/optim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pmnet::train {

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(lr_initial > 0.0)) throw std::invalid_argument("TrainConfig: lr_initial must be positive");
  if (!(lr_gamma > 0.0)) throw std::invalid_argument("TrainConfig: lr_gamma must be positive");
  if (probe_every < 0 || probe_samples < 0) throw std::invalid_argument("TrainConfig: negative probe settings");
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"lr_initial", c.lr_initial},
           {"lr_gamma", c.lr_gamma},
           {"lr_step_epochs", c.lr_step_epochs},
           {"batch_size", c.batch_size},
           {"epochs", c.epochs},
           {"seed", c.seed},
           {"weight_decay", c.weight_decay},
           {"probe_every", c.probe_every},
           {"probe_samples", c.probe_samples},
           {"stop_at_val_rmse", c.stop_at_val_rmse},
           {"freeze_prefixes", c.freeze_prefixes},
           {"random_transforms", c.random_transforms},
           {"optimizer", "adam"}};
}

void from_json(const json& j, TrainConfig& c) {
  c.lr_initial = j.value("lr_initial", c.lr_initial);
  c.lr_gamma = j.value("lr_gamma", c.lr_gamma);
  c.lr_step_epochs = j.value("lr_step_epochs", c.lr_step_epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.probe_every = j.value("probe_every", c.probe_every);
  c.probe_samples = j.value("probe_samples", c.probe_samples);
  c.stop_at_val_rmse = j.value("stop_at_val_rmse", c.stop_at_val_rmse);
  c.freeze_prefixes = j.value("freeze_prefixes", c.freeze_prefixes);
  c.random_transforms = j.value("random_transforms", c.random_transforms);
}

double mse_loss(const model::Tensor& pred, const model::Tensor& target) {
  if (!(pred.shape() == target.shape()))
    throw std::invalid_argument("mse_loss: shape mismatch " + pred.shape().str() + " vs " + target.shape().str());
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.numel(); ++i) {
    const double d = static_cast<double>(pred[i]) - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.numel());
}

std::pair<double, double> validate(const model::PmnetModel& model, const std::vector<dataset::GraySample>& val,
                                   int max_samples) {
  const std::size_t n = max_samples > 0 ? std::min<std::size_t>(val.size(), max_samples) : val.size();
  if (n == 0) throw std::invalid_argument("validate: no samples");
  constexpr std::size_t kBatch = 8;
  double sq = 0.0, rmse_sum = 0.0;
  std::size_t pixels = 0;
  for (std::size_t b = 0; b < n; b += kBatch) {
    std::vector<const dataset::GraySample*> batch;
    for (std::size_t i = b; i < std::min(n, b + kBatch); ++i) batch.push_back(&val[i]);
    const auto out = model.predict(eval::make_input(batch));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto pred = eval::output_map(out, static_cast<int>(i));
      const auto gt = eval::normalize(batch[i]->target);
      const double r = eval::rmse(pred, gt);
      rmse_sum += r;
      sq += r * r * static_cast<double>(gt.values.size());
      pixels += gt.values.size();
    }
  }
  return {sq / static_cast<double>(pixels), rmse_sum / static_cast<double>(n)};
}

namespace {

void check_sizes(const model::PmnetModel& model, const dataset::SampleSet& set, const char* which) {
  const int s = model.config().input_size;
  for (const auto& x : set.samples)
    if (x.size() != s)
      throw std::invalid_argument(std::string("train: ") + which + " sample " + x.sample_id + " is " +
                                  std::to_string(x.size()) + " px, model expects " + std::to_string(s));
}

}  // namespace

TrainRun train(model::PmnetModel& model, const dataset::SampleSet& train_set, const dataset::SampleSet& val_set,
               const TrainConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  if (train_set.samples.empty() || val_set.samples.empty())
    throw std::invalid_argument("train: TRAIN and VAL must be nonempty");
  check_sizes(model, train_set, "training");
  check_sizes(model, val_set, "validation");

  const auto start = std::chrono::steady_clock::now();
  auto params = model.params().trainable_except(cfg.freeze_prefixes);
  nn::Adam opt(params, {cfg.lr_initial, 0.9, 0.999, 1e-8, cfg.weight_decay});
  TrainRun run;
  run.best_val_mse = std::numeric_limits<double>::infinity();
  std::deque<double> recent;

  auto probe = [&](long long step) {
    const auto [mse, rmse] = validate(model, val_set.samples, cfg.probe_samples);
    run.probes.push_back({step, mse, rmse});
    if (cfg.stop_at_val_rmse > 0.0 && rmse <= cfg.stop_at_val_rmse) run.stopped_early = true;
  };
  if (cfg.probe_every > 0) probe(0);

  const std::size_t n = train_set.samples.size();
  std::vector<std::size_t> order(n);
  for (int epoch = 0; epoch < cfg.epochs && !run.stopped_early; ++epoch) {
    const double lr = nn::step_lr(cfg.lr_initial, cfg.lr_gamma, cfg.lr_step_epochs, epoch);
    opt.set_lr(lr);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order.begin(), order.end());

    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t b = 0; b < n && !run.stopped_early; b += cfg.batch_size) {
      std::vector<const dataset::GraySample*> batch;
      std::vector<dataset::GraySample> transformed;
      transformed.reserve(cfg.batch_size);
      for (std::size_t i = b; i < std::min(n, b + cfg.batch_size); ++i) {
        const auto& s = train_set.samples[order[i]];
        if (!cfg.random_transforms) {
          batch.push_back(&s);
          continue;
        }
        const auto t = static_cast<dataset::Transform>(rng.uniform_int(0, 6));
        transformed.push_back(dataset::transform_sample(s, t));
        batch.push_back(&transformed.back());
      }
      const auto x = nn::constant(eval::make_input(batch));
      const auto y = model.forward(x, true);
      const auto loss = nn::mse_loss(y, eval::make_target(batch));
      const double value = loss->value[0];
      if (!std::isfinite(value)) {
        std::ostringstream os;
        os << "training diverged at step " << run.steps + 1 << " (epoch " << epoch + 1 << ", lr " << lr
           << "); recent losses:";
        for (double r : recent) os << ' ' << r;
        throw DivergenceError(os.str());
      }
      nn::backward(loss);
      opt.step();
      opt.zero_grad();
      ++run.steps;
      run.step_history.push_back({run.steps, value});
      recent.push_back(value);
      if (recent.size() > 10) recent.pop_front();
      epoch_loss += value;
      ++batches;
      if (cfg.probe_every > 0 && run.steps % cfg.probe_every == 0) probe(run.steps);
    }

    const auto [val_mse, val_rmse] = validate(model, val_set.samples);
    run.epoch_history.push_back({epoch + 1, run.steps, lr, epoch_loss / std::max(1, batches), val_mse, val_rmse});
    if (val_mse < run.best_val_mse) {
      run.best_val_mse = val_mse;
      run.best_epoch = epoch + 1;
      run.best_state = model.snapshot();
    }
    if (progress) {
      std::ostringstream os;
      os << "epoch " << epoch + 1 << "/" << cfg.epochs << " lr " << lr << " train_mse "
         << epoch_loss / std::max(1, batches) << " val_mse " << val_mse << " val_rmse " << val_rmse;
      progress(os.str());
    }
  }
  if (run.best_state.empty()) {
    // stopped by the step-0 probe: nothing trained, keep the initial state
    const auto [val_mse, val_rmse] = validate(model, val_set.samples);
    run.epoch_history.push_back({0, 0, cfg.lr_initial, 0.0, val_mse, val_rmse});
    run.best_val_mse = val_mse;
    run.best_state = model.snapshot();
  }
  model.restore(run.best_state);
  run.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

TrainRun finetune(model::PmnetModel& model, const std::optional<fs::path>& pretrained,
                  const dataset::SampleSet& train_set, const dataset::SampleSet& val_set, double fraction,
                  const TrainConfig& cfg, const ProgressFn& progress) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("finetune: fraction must be in (0, 1]");
  if (pretrained) model::load_parameters(*pretrained, model);
  const auto subset = dataset::subsample(train_set, fraction, cfg.seed);
  return train(model, subset, val_set, cfg, progress);
}

std::map<double, std::optional<long long>> steps_to_threshold(const TrainRun& run,
                                                              const std::vector<double>& thresholds) {
  std::map<double, std::optional<long long>> out;
  for (double t : thresholds) {
    out[t] = std::nullopt;
    for (const auto& p : run.probes)
      if (p.val_rmse <= t) {
        out[t] = p.step;
        break;
      }
  }
  return out;
}

void write_run_dir(const fs::path& dir, const model::PmnetModel& model, const TrainConfig& cfg, const TrainRun& run,
                   const json& extra) {
  fs::create_directories(dir / "checkpoints");
  write_text_file(dir / "config.json", json{{"train", cfg}, {"model", model.config()}, {"extra", extra}}.dump(2) + "\n");

  std::ostringstream csv;
  csv.precision(10);
  csv << "step,split,metric,value\n";
  for (const auto& s : run.step_history) csv << s.step << ",train,mse," << s.train_mse << "\n";
  for (const auto& p : run.probes) {
    csv << p.step << ",val_probe,mse," << p.val_mse << "\n";
    csv << p.step << ",val_probe,rmse," << p.val_rmse << "\n";
  }
  for (const auto& e : run.epoch_history) {
    csv << e.end_step << ",val,mse," << e.val_mse << "\n";
    csv << e.end_step << ",val,rmse," << e.val_rmse << "\n";
    csv << e.end_step << ",train_epoch,mse," << e.train_mse << "\n";
    csv << e.end_step << ",train_epoch,lr," << e.lr << "\n";
  }
  write_text_file(dir / "metrics.csv", csv.str());

  json meta = extra.is_object() ? extra : json::object();
  meta.update(json{{"best_epoch", run.best_epoch}, {"best_val_mse", run.best_val_mse}, {"steps", run.steps}});
  model::save_checkpoint(dir / "checkpoints" / "best.ckpt", model, meta);

  json epochs = json::array();
  for (const auto& e : run.epoch_history)
    epochs.push_back({{"epoch", e.epoch}, {"end_step", e.end_step}, {"lr", e.lr}, {"train_mse", e.train_mse}, {"val_mse", e.val_mse},
                      {"val_rmse", e.val_rmse}});
  json report{{"best_epoch", run.best_epoch},
              {"best_val_mse", run.best_val_mse},
              {"steps", run.steps},
              {"step_unit", "optimizer steps"},
              {"stopped_early", run.stopped_early},
              {"wall_time_s", run.wall_time_s},
              {"epochs", epochs},
              {"extra", extra}};
  write_text_file(dir / "report.json", report.dump(2) + "\n");
}

}  // namespace pmnet::train
