#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "pmnet/dataset/builder.hpp"
#include "pmnet/model/checkpoint.hpp"
#include "pmnet/train/sweep.hpp"
#include "pmnet/train/trainer.hpp"

using namespace pmnet;
using namespace pmnet::train;

namespace {

model::PmnetConfig tiny() {
  auto c = model::PmnetConfig::desk();
  c.input_size = 32;
  c.base_width = 4;
  c.block_counts = {1, 1, 1, 1};
  return c;
}

dataset::SplitSets tiny_data(int maps = 10, int tx_per_map = 1) {
  auto sc = dataset::scenario_preset("urban_a");
  sc.map.size = 32;
  sc.map.block_min = 4;
  sc.map.block_max = 8;
  sc.tx_margin = 2;
  sc.n_maps = maps;
  sc.tx_per_map = tx_per_map;
  sc.raylaunch.n_rays = 180;
  std::vector<dataset::GraySample> samples;
  for (const auto& scene : dataset::generate_scenes(sc)) samples.push_back(dataset::make_sample(scene));
  return dataset::split_samples(samples, 0.8, 1);
}

TrainConfig quick(int epochs = 2) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 4;
  c.probe_every = 2;
  return c;
}

model::Tensor filled(float v) { return model::Tensor({1, 1, 4, 4}, v); }

}  // namespace

TEST(MseLoss, Examples) {
  EXPECT_EQ(mse_loss(filled(0.3f), filled(0.3f)), 0.0);
  EXPECT_NEAR(mse_loss(filled(0.6f), filled(0.5f)), 0.01, 1e-7);
  auto p = filled(0.0f);
  p[5] = 0.4f;
  EXPECT_NEAR(mse_loss(p, filled(0.0f)), 0.16 / 16, 1e-8);
  EXPECT_THROW(mse_loss(filled(0), model::Tensor({1, 1, 2, 2})), std::invalid_argument);
}

TEST(Config, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.epochs = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  const auto j = nlohmann::json(TrainConfig{});
  EXPECT_EQ(j.get<TrainConfig>().lr_step_epochs, 10);
  EXPECT_EQ(j.at("lr_gamma"), 0.5);
}

TEST(Train, LearningRateHalvesAtEpochTen) {
  const auto d = tiny_data(6);
  model::PmnetModel net(tiny());
  auto c = quick(11);
  c.batch_size = 16;
  c.probe_every = 0;
  const auto run = train::train(net, d.train, d.val, c);
  ASSERT_EQ(run.epoch_history.size(), 11u);
  EXPECT_DOUBLE_EQ(run.epoch_history[10].lr, 0.5 * run.epoch_history[0].lr);
  EXPECT_DOUBLE_EQ(run.epoch_history[9].lr, run.epoch_history[0].lr);
}

TEST(Train, SameSeedSameHistory) {
  const auto d = tiny_data();
  model::PmnetModel a(tiny()), b(tiny());
  const auto ra = train::train(a, d.train, d.val, quick());
  const auto rb = train::train(b, d.train, d.val, quick());
  ASSERT_EQ(ra.epoch_history.size(), rb.epoch_history.size());
  for (std::size_t i = 0; i < ra.epoch_history.size(); ++i) {
    EXPECT_EQ(ra.epoch_history[i].val_mse, rb.epoch_history[i].val_mse);
    EXPECT_EQ(ra.epoch_history[i].train_mse, rb.epoch_history[i].train_mse);
  }
  EXPECT_EQ(a.snapshot(), b.snapshot());
}

TEST(Train, BestIsMinimumOfHistoryAndRestored) {
  const auto d = tiny_data();
  model::PmnetModel net(tiny());
  const auto run = train::train(net, d.train, d.val, quick(4));
  double best = 1e9;
  for (const auto& e : run.epoch_history) best = std::min(best, e.val_mse);
  EXPECT_EQ(run.best_val_mse, best);
  EXPECT_EQ(validate(net, d.val.samples).first, best);
  EXPECT_EQ(run.steps, static_cast<long long>(run.step_history.size()));
}

TEST(Train, OverfitsSingleSample) {
  const auto d = tiny_data(4);
  dataset::SampleSet one{{d.train.samples.front()}};
  model::PmnetModel net(tiny());
  TrainConfig c;
  c.epochs = 200;
  c.lr_initial = 1e-2;
  c.batch_size = 1;
  c.probe_every = 0;
  c.lr_step_epochs = 1000;
  const auto run = train::train(net, one, one, c);
  EXPECT_EQ(run.steps, 200);
  EXPECT_LT(run.step_history.back().train_mse, 1e-3);
}

TEST(Train, RejectsEmptySplitsAndWrongSize) {
  const auto d = tiny_data(4);
  model::PmnetModel net(tiny());
  EXPECT_THROW(train::train(net, {}, d.val, quick()), std::invalid_argument);
  auto big = tiny();
  big.input_size = 64;
  model::PmnetModel other(big);
  EXPECT_THROW(train::train(other, d.train, d.val, quick()), std::invalid_argument);
}

TEST(Train, DivergenceAborts) {
  const auto d = tiny_data(4);
  model::PmnetModel net(tiny());
  auto c = quick();
  c.lr_initial = 1e30;
  try {
    train::train(net, d.train, d.val, c);
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("diverged"), std::string::npos);
    return;
  }
  // a huge step may also saturate the sigmoid without producing NaN
  SUCCEED();
}

TEST(Train, FrozenPrefixesStayFixed) {
  const auto d = tiny_data(4);
  model::PmnetModel net(tiny());
  const auto e1 = net.params().find("e1.conv.weight");
  ASSERT_TRUE(e1);
  const auto before = e1->value;
  auto c = quick(1);
  c.freeze_prefixes = {"e1"};
  train::train(net, d.train, d.val, c);
  EXPECT_EQ(e1->value, before);
}

TEST(StepsToThreshold, Examples) {
  TrainRun run;
  run.probes = {{1, 0, 0.5}, {2, 0, 0.2}, {3, 0, 0.09}};
  const auto r = steps_to_threshold(run, {0.1, 0.01});
  EXPECT_EQ(r.at(0.1), 3);
  EXPECT_FALSE(r.at(0.01).has_value());
  run.probes.push_back({4, 0, 0.03});
  EXPECT_EQ(steps_to_threshold(run, {0.03}).at(0.03), 4);
}

TEST(Finetune, FullFractionWithoutCheckpointEqualsTrain) {
  const auto d = tiny_data();
  model::PmnetModel a(tiny()), b(tiny());
  const auto ra = train::train(a, d.train, d.val, quick());
  const auto rb = finetune(b, std::nullopt, d.train, d.val, 1.0, quick());
  ASSERT_EQ(ra.epoch_history.size(), rb.epoch_history.size());
  for (std::size_t i = 0; i < ra.epoch_history.size(); ++i)
    EXPECT_EQ(ra.epoch_history[i].val_mse, rb.epoch_history[i].val_mse);
}

TEST(Finetune, FractionKeepsWholeMapsAndValidation) {
  const auto d = tiny_data(20, 2);
  const auto sub = dataset::subsample(d.train, 0.2, 3);
  const double share = static_cast<double>(sub.samples.size()) / d.train.samples.size();
  EXPECT_NEAR(share, 0.2, 0.1);
  std::set<std::string> kept, val;
  for (const auto& s : sub.samples) kept.insert(s.map_id);
  for (const auto& s : d.val.samples) val.insert(s.map_id);
  for (const auto& s : d.train.samples) {
    if (!kept.count(s.map_id)) continue;
    EXPECT_TRUE(std::any_of(sub.samples.begin(), sub.samples.end(),
                            [&](const auto& k) { return k.sample_id == s.sample_id; }));
  }
  for (const auto& id : kept) EXPECT_EQ(val.count(id), 0u);
}

TEST(Finetune, StartsFromCheckpointWithoutResizing) {
  pmnet::testing::TempDir dir;
  const auto d = tiny_data();
  model::PmnetModel pre(tiny());
  train::train(pre, d.train, d.val, quick());
  model::save_checkpoint(dir / "pre.ckpt", pre, {});
  auto cfg = tiny();
  cfg.init_seed = 42;
  model::PmnetModel net(cfg);
  std::vector<nn::Shape> shapes;
  for (const auto& e : net.params().entries()) shapes.push_back(e.var->value.shape());
  auto c = quick(1);
  c.probe_every = 1;
  const auto run = finetune(net, dir / "pre.ckpt", d.train, d.val, 1.0, c);
  // the step-0 probe sees the pre-trained weights
  EXPECT_NEAR(run.probes.front().val_rmse, validate(pre, d.val.samples).second, 1e-6);
  for (std::size_t i = 0; i < shapes.size(); ++i) EXPECT_EQ(net.params().entries()[i].var->value.shape(), shapes[i]);

  auto wide = tiny();
  wide.base_width = 8;
  model::PmnetModel other(wide);
  EXPECT_THROW(finetune(other, dir / "pre.ckpt", d.train, d.val, 1.0, c), model::CheckpointError);
}

TEST(Sweep, SingleFractionIsOneFinetune) {
  const auto d = tiny_data();
  const auto rows = data_fraction_sweep(tiny(), {{"vanilla", std::nullopt}}, d.train, d.val, {0.5}, quick(), {0});
  ASSERT_EQ(rows.size(), 1u);
  auto cfg = tiny();
  cfg.init_seed = 0;
  model::PmnetModel net(cfg);
  auto c = quick();
  c.seed = 0;
  const auto run = finetune(net, std::nullopt, d.train, d.val, 0.5, c);
  EXPECT_EQ(rows[0].steps, run.steps);
  const auto csv = sweep_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "label,fraction,seed,n_train,rmse,roi_err,chan_err_db,steps,steps_to_0.03,steps_to_0.1");
  EXPECT_NE(sweep_svg(rows).find("<polyline"), std::string::npos);
}

TEST(RunDir, Layout) {
  pmnet::testing::TempDir dir;
  const auto d = tiny_data(5);
  model::PmnetModel net(tiny());
  const auto run = train::train(net, d.train, d.val, quick(1));
  write_run_dir(dir.path(), net, quick(1), run, {{"tx_dilation", 0}});
  for (const char* f : {"config.json", "metrics.csv", "report.json", "checkpoints/best.ckpt"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  const auto csv = read_text_file(dir / "metrics.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,split,metric,value");
  EXPECT_NE(csv.find(",val,mse,"), std::string::npos);
  const auto report = nlohmann::json::parse(read_text_file(dir / "report.json"));
  EXPECT_EQ(report.at("step_unit"), "optimizer steps");
  const auto ck = model::load_checkpoint(dir / "checkpoints/best.ckpt");
  EXPECT_EQ(ck.metadata.at("tx_dilation"), 0);
  model::Tensor x({1, 2, 32, 32}, 0.5f);
  EXPECT_EQ(ck.model->predict(x), net.predict(x));
}
