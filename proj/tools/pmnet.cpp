// pmnet: command line front end for the workbench.
//
// Every sub-command writes the configuration it actually ran with next to
// its outputs. Exit status: 0 success, 2 invalid input (bad flags, missing
// dataset, incompatible checkpoint, domain errors), 1 anything else.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pmnet/app/predict.hpp"
#include "pmnet/app/service.hpp"
#include "pmnet/dataset/builder.hpp"
#include "pmnet/eval/metrics.hpp"
#include "pmnet/eval/predictors.hpp"
#include "pmnet/eval/render.hpp"
#include "pmnet/model/checkpoint.hpp"
#include "pmnet/train/sweep.hpp"
#include "pmnet/train/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pmnet;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json(const fs::path& p) {
  if (!fs::exists(p)) throw UsageError("config file not found: " + p.string());
  return json::parse(read_text_file(p));
}

void write_json(const fs::path& p, const json& j) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_text_file(p, j.dump(2) + "\n");
}

void log(const std::string& line) { std::cerr << line << std::endl; }

std::optional<fs::path> env_path(const char* name) {
  if (const char* v = std::getenv(name); v && *v) return fs::path(v);
  return std::nullopt;
}

fs::path dataset_root(const std::string& flag) {
  fs::path root = flag;
  if (root.empty()) {
    const auto env = env_path("PMNET_DATASET_ROOT");
    if (!env) throw UsageError("no dataset root: pass --data or set PMNET_DATASET_ROOT");
    root = *env;
  }
  if (!fs::exists(root / "manifest.json")) throw UsageError("missing dataset root (no manifest.json): " + root.string());
  return root;
}

std::optional<fs::path> registry_dir(const std::string& flag) {
  if (!flag.empty()) return fs::path(flag);
  return env_path("PMNET_REGISTRY");
}

// ---- shared option groups ----------------------------------------------------

struct PrepFlags {
  std::optional<bool> crop;
  std::optional<int> crop_size, output_size, stride, tx_dilation;
  std::optional<bool> rotations, flips;

  void add(CLI::App* cmd) {
    cmd->add_option("--crop", crop, "Crop augmentation on/off");
    cmd->add_option("--crop-size", crop_size, "Crop window in scene pixels");
    cmd->add_option("--output-size", output_size, "Sample size after upsampling");
    cmd->add_option("--stride", stride, "Crop window stride");
    cmd->add_option("--rotations", rotations, "Rotation augmentation (x4)");
    cmd->add_option("--flips", flips, "Flip augmentation (x4)");
    cmd->add_option("--tx-dilation", tx_dilation, "TX marker half width in pixels");
  }

  void apply(dataset::PreprocessConfig& p) const {
    if (crop) p.crop = *crop;
    if (crop_size) p.crop_cfg.crop_size = *crop_size;
    if (output_size) p.crop_cfg.output_size = *output_size;
    if (stride) p.crop_cfg.stride = *stride;
    if (rotations) p.augment.rotations = *rotations;
    if (flips) p.augment.flips = *flips;
    if (tx_dilation) {
      p.tx_dilation = *tx_dilation;
      p.crop_cfg.tx_dilation = *tx_dilation;
    }
  }
};

struct TrainFlags {
  std::string config;
  std::optional<double> lr, gamma, weight_decay, stop_at;
  std::optional<int> lr_step, batch, epochs, probe_every, probe_samples;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> freeze;
  bool random_transforms = false;
  std::string profile = "desk";
  std::string model_config;

  void add(CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON file with TrainConfig fields");
    cmd->add_option("--lr-initial", lr, "Initial learning rate");
    cmd->add_option("--lr-gamma", gamma, "LR decay factor");
    cmd->add_option("--lr-step-epochs", lr_step, "Epochs between LR decays");
    cmd->add_option("--batch-size", batch, "Batch size");
    cmd->add_option("--epochs", epochs, "Epochs");
    cmd->add_option("--seed", seed, "Shuffle and init seed");
    cmd->add_option("--weight-decay", weight_decay, "Adam weight decay");
    cmd->add_option("--probe-every", probe_every, "Validation probe interval in optimizer steps (0: off)");
    cmd->add_option("--probe-samples", probe_samples, "Validation samples per probe (0: all)");
    cmd->add_option("--stop-at-val-rmse", stop_at, "Stop once a probe reaches this RMSE");
    cmd->add_option("--freeze", freeze, "Parameter name prefixes to keep fixed");
    cmd->add_flag("--random-transforms", random_transforms, "Random rotation/flip per training sample");
    cmd->add_option("--profile", profile, "Model profile: desk or full")->check(CLI::IsMember({"desk", "full"}));
    cmd->add_option("--model-config", model_config, "JSON file with PmnetConfig fields (overrides --profile)");
  }

  train::TrainConfig train_config() const {
    train::TrainConfig c;
    if (!config.empty()) c = read_json(config).get<train::TrainConfig>();
    if (lr) c.lr_initial = *lr;
    if (gamma) c.lr_gamma = *gamma;
    if (lr_step) c.lr_step_epochs = *lr_step;
    if (batch) c.batch_size = *batch;
    if (epochs) c.epochs = *epochs;
    if (seed) c.seed = *seed;
    if (weight_decay) c.weight_decay = *weight_decay;
    if (probe_every) c.probe_every = *probe_every;
    if (probe_samples) c.probe_samples = *probe_samples;
    if (stop_at) c.stop_at_val_rmse = *stop_at;
    if (!freeze.empty()) c.freeze_prefixes = freeze;
    if (random_transforms) c.random_transforms = true;
    c.validate();
    return c;
  }

  model::PmnetConfig model_cfg(std::uint64_t init_seed) const {
    model::PmnetConfig m = profile == "full" ? model::PmnetConfig{} : model::PmnetConfig::desk();
    if (!model_config.empty()) m = read_json(model_config).get<model::PmnetConfig>();
    m.init_seed = init_seed;
    m.validate();
    return m;
  }
};

struct Splits {
  dataset::DatasetManifest manifest;
  dataset::SampleSet train, val;
};

Splits load_splits(const fs::path& root) {
  Splits s;
  s.manifest = dataset::load_manifest(root);
  s.train = dataset::load_split(root, s.manifest, dataset::Split::Train);
  s.val = dataset::load_split(root, s.manifest, dataset::Split::Val);
  if (s.train.samples.empty() || s.val.samples.empty())
    throw UsageError("dataset " + root.string() + " needs nonempty train and val splits");
  return s;
}

json run_extra(const Splits& s, const fs::path& root) {
  return {{"dataset_id", s.manifest.dataset_id},
          {"dataset_root", fs::absolute(root).string()},
          {"tx_dilation", s.train.samples.front().tx_dilation},
          {"n_train", s.train.samples.size()},
          {"n_val", s.val.samples.size()}};
}

// ---- sub-commands --------------------------------------------------------------

int cmd_generate(const fs::path& out, const std::string& preset, const std::string& config,
                 const std::optional<int>& maps, const std::optional<int>& tx_per_map,
                 const std::optional<std::uint64_t>& seed, const std::optional<std::string>& generator,
                 const std::optional<std::string>& name, const PrepFlags& pf, double train_fraction,
                 std::uint64_t split_seed) {
  dataset::ScenarioConfig sc = config.empty() ? dataset::scenario_preset(preset)
                                              : read_json(config).get<dataset::ScenarioConfig>();
  if (maps) sc.n_maps = *maps;
  if (tx_per_map) sc.tx_per_map = *tx_per_map;
  if (seed) sc.seed = *seed;
  if (generator) sc.generator = *generator;
  if (name) sc.name = *name;
  dataset::PreprocessConfig prep;
  pf.apply(prep);
  const auto m = dataset::build_dataset(out, sc, prep, train_fraction, split_seed);
  write_json(out / "generate_config.json", {{"scenario", sc},
                                            {"preprocess", prep},
                                            {"train_fraction", train_fraction},
                                            {"split_seed", split_seed}});
  std::cout << json{{"dataset_id", m.dataset_id},
                    {"scenes", dataset::list_scenes(out).size()},
                    {"samples", m.samples.size()},
                    {"train", m.in_split(dataset::Split::Train).size()},
                    {"val", m.in_split(dataset::Split::Val).size()}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_preprocess(const fs::path& root, const PrepFlags& pf, double train_fraction, std::uint64_t split_seed) {
  if (!fs::exists(root / "scenes")) throw UsageError("missing dataset root (no scenes/): " + root.string());
  dataset::PreprocessConfig prep;
  pf.apply(prep);
  const auto m = dataset::rebuild_samples(root, prep, train_fraction, split_seed);
  write_json(root / "preprocess_config.json",
             {{"preprocess", prep}, {"train_fraction", train_fraction}, {"split_seed", split_seed}});
  std::cout << json{{"dataset_id", m.dataset_id}, {"samples", m.samples.size()}}.dump() << "\n";
  return 0;
}

int cmd_train(const fs::path& root, const fs::path& out, const TrainFlags& tf, const std::string& pretrained,
              double fraction, const std::string& registry) {
  const auto cfg = tf.train_config();
  const auto splits = load_splits(root);
  const auto ckpt = app::ModelRegistry::resolve_checkpoint(registry_dir(registry), pretrained);
  model::PmnetConfig mcfg;
  if (ckpt && tf.model_config.empty()) {
    // fine-tuning keeps the checkpoint's topology
    mcfg = model::read_checkpoint_header(*ckpt).at("config").get<model::PmnetConfig>();
    mcfg.init_seed = cfg.seed;
  } else {
    mcfg = tf.model_cfg(cfg.seed);
  }
  model::PmnetModel net(mcfg);
  const auto run = train::finetune(net, ckpt, splits.train, splits.val, fraction, cfg, log);
  auto extra = run_extra(splits, root);
  extra["pretrained"] = ckpt ? json(fs::absolute(*ckpt).string()) : json(nullptr);
  extra["fraction"] = fraction;
  extra["n_train_used"] = dataset::subsample(splits.train, fraction, cfg.seed).samples.size();
  extra["steps_to_threshold"] = json::object();
  for (const auto& [t, s] : train::steps_to_threshold(run, {0.1, 0.03}))
    extra["steps_to_threshold"][std::to_string(t)] = s ? json(*s) : json("never");
  train::write_run_dir(out, net, cfg, run, extra);
  std::cout << json{{"run_dir", out.string()},
                    {"best_epoch", run.best_epoch},
                    {"best_val_mse", run.best_val_mse},
                    {"steps", run.steps}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_sweep(const fs::path& root, const fs::path& out, const TrainFlags& tf, const std::vector<std::string>& pretrained,
              const std::vector<double>& fractions, const std::vector<std::uint64_t>& seeds,
              const std::vector<double>& thresholds, const std::string& registry) {
  const auto cfg = tf.train_config();
  const auto splits = load_splits(root);
  std::vector<train::SweepOption> options;
  model::PmnetConfig mcfg = tf.model_cfg(cfg.seed);
  for (const auto& p : pretrained) {
    const auto ckpt = app::ModelRegistry::resolve_checkpoint(registry_dir(registry), p);
    if (ckpt && tf.model_config.empty())
      mcfg = model::read_checkpoint_header(*ckpt).at("config").get<model::PmnetConfig>();
    options.push_back({ckpt ? p : std::string("vanilla"), ckpt});
  }
  const auto rows = train::data_fraction_sweep(mcfg, options, splits.train, splits.val, fractions, cfg, seeds,
                                               thresholds, log);
  fs::create_directories(out);
  write_text_file(out / "sweep.csv", train::sweep_csv(rows));
  write_text_file(out / "sweep.svg", train::sweep_svg(rows));
  write_json(out / "config.json", {{"train", cfg},
                                   {"model", mcfg},
                                   {"pretrained", pretrained},
                                   {"fractions", fractions},
                                   {"seeds", seeds},
                                   {"thresholds", thresholds},
                                   {"dataset_root", fs::absolute(root).string()},
                                   {"step_unit", "optimizer steps"}});
  std::cout << train::sweep_csv(rows);
  return 0;
}

int cmd_evaluate(const fs::path& root, const std::string& model_id, const std::string& split_name,
                 const fs::path& out, const std::string& registry, const std::string& roi_mode, int render) {
  const auto manifest = dataset::load_manifest(root);
  const auto split = dataset::parse_split(split_name);
  const auto set = dataset::load_split(root, manifest, split);
  if (set.samples.empty()) throw UsageError("split " + split_name + " is empty");
  const auto mode = roi_mode == "gt" ? eval::RoiMode::GroundTruth : eval::RoiMode::Intersection;

  eval::Predictor predictor;
  std::unique_ptr<model::PmnetModel> net;
  if (model_id == "3gpp" || model_id == "raylaunch") {
    dataset::ScenarioConfig sc;
    if (manifest.provenance.contains("scenario")) sc = manifest.provenance["scenario"].get<dataset::ScenarioConfig>();
    predictor = eval::baseline_predictor(model_id, sc.propagation, sc.raylaunch);
  } else {
    const auto ckpt = app::ModelRegistry::resolve_checkpoint(registry_dir(registry), model_id);
    net = model::load_checkpoint(*ckpt).model;
    if (net->config().input_size != set.samples.front().size())
      throw UsageError("checkpoint takes " + std::to_string(net->config().input_size) + " px inputs, dataset has " +
                       std::to_string(set.samples.front().size()));
    predictor = eval::model_predictor(*net);
  }
  const auto report = eval::evaluate(predictor, set.samples, model_id, manifest.dataset_id, mode);
  fs::create_directories(out);
  write_json(out / "report.json", eval::to_json(report));
  write_text_file(out / "per_sample.csv", eval::per_sample_csv(report));
  write_json(out / "config.json", {{"model", model_id},
                                   {"dataset_root", fs::absolute(root).string()},
                                   {"split", split_name},
                                   {"roi_mode", roi_mode}});
  for (int i = 0; i < std::min<int>(render, static_cast<int>(set.samples.size())); ++i) {
    const auto& s = set.samples[i];
    const auto pred = eval::quantize(predictor(s));
    write_png(out / ("render_" + s.sample_id + ".png"),
              eval::side_by_side({eval::render_gray(pred, s.tx), eval::render_gray(s.target, s.tx),
                                  eval::render_difference(pred, s.target, 32, s.tx)}));
  }
  std::cout << eval::to_json(report).dump(2) << "\n";
  return 0;
}

int cmd_predict(const std::string& data, const std::string& registry, const std::string& map_id,
                const std::string& map_png, double mpp, const std::string& tx, const std::string& model_id,
                const fs::path& out, const std::string& json_out) {
  app::MapStore maps;
  if (!map_id.empty()) maps = app::MapStore(dataset_root(data));
  const app::ModelRegistry models(registry_dir(registry));
  json req{{"model_id", model_id}, {"meters_per_pixel", mpp}};
  const auto comma = tx.find(',');
  if (comma == std::string::npos) throw UsageError("--tx must be x,y");
  req["tx"] = {std::stoi(tx.substr(0, comma)), std::stoi(tx.substr(comma + 1))};
  if (!map_id.empty()) req["map_id"] = map_id;
  if (!map_png.empty()) req["map_png"] = base64_encode(read_file_bytes(map_png));
  const auto res = app::predict(models, maps, app::parse_predict_request(req));
  const auto png = encode_png(res.gray);
  write_file_bytes(out, png);
  auto summary = app::to_json(res);
  summary.erase("gray_png");
  summary.erase("roi_png");
  summary["output"] = out.string();
  if (!json_out.empty()) write_json(json_out, app::to_json(res));
  write_json(fs::path(out).replace_extension(".config.json"), req.contains("map_png")
                                                                    ? json{{"model_id", model_id},
                                                                           {"map_png", map_png},
                                                                           {"meters_per_pixel", mpp},
                                                                           {"tx", req["tx"]}}
                                                                    : req);
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_serve(const std::string& host, int port, const std::string& data, const std::string& registry, int threads) {
  app::ServiceConfig cfg;
  if (!data.empty()) cfg.dataset_root = fs::path(data);
  if (!registry.empty()) cfg.registry = fs::path(registry);
  cfg.threads = threads;
  cfg = app::with_env_defaults(cfg);
  app::Service service(cfg);
  const int bound = service.bind(host, port);
  log("listening on http://" + host + ":" + std::to_string(bound));
  service.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pathloss map workbench: datasets, PMNet training, evaluation and serving"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate scenes and samples into a dataset root");
  std::string gen_out, gen_preset = "urban_a", gen_config;
  std::optional<int> gen_maps, gen_tpm;
  std::optional<std::uint64_t> gen_seed;
  std::optional<std::string> gen_generator, gen_name;
  double train_fraction = 0.9;
  std::uint64_t split_seed = 0;
  PrepFlags gen_prep;
  gen->add_option("--out", gen_out, "Dataset root to create")->required();
  gen->add_option("--preset", gen_preset, "Scenario preset: urban_a, urban_b, city_256");
  gen->add_option("--scenario", gen_config, "JSON file with ScenarioConfig fields (instead of --preset)");
  gen->add_option("--maps", gen_maps, "Number of maps");
  gen->add_option("--tx-per-map", gen_tpm, "Scenes (TX positions) per map");
  gen->add_option("--seed", gen_seed, "Scenario seed");
  gen->add_option("--generator", gen_generator, "Ground truth: raylaunch or 3gpp")
      ->check(CLI::IsMember({"raylaunch", "3gpp"}));
  gen->add_option("--name", gen_name, "Scenario name (id prefix)");
  gen->add_option("--train-fraction", train_fraction, "Map-exclusive train fraction");
  gen->add_option("--split-seed", split_seed, "Split seed");
  gen_prep.add(gen);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Rebuild samples and split from the scenes of a dataset root");
  std::string pre_root;
  PrepFlags pre_prep;
  pre->add_option("--data", pre_root, "Dataset root")->required();
  pre->add_option("--train-fraction", train_fraction, "Map-exclusive train fraction");
  pre->add_option("--split-seed", split_seed, "Split seed");
  pre_prep.add(pre);

  // train / finetune
  std::string data, out, registry;
  TrainFlags tf;
  auto* tr = app.add_subcommand("train", "Train PMNet from scratch");
  tr->add_option("--data", data, "Dataset root (default: PMNET_DATASET_ROOT)");
  tr->add_option("--out", out, "Run directory")->required();
  tf.add(tr);

  auto* ft = app.add_subcommand("finetune", "Fine-tune a checkpoint on a fraction of the training split");
  std::string pretrained;
  double fraction = 1.0;
  TrainFlags ftf;
  ft->add_option("--data", data, "Dataset root (default: PMNET_DATASET_ROOT)");
  ft->add_option("--out", out, "Run directory")->required();
  ft->add_option("--pretrained", pretrained, "Checkpoint path, registry id, or none")->required();
  ft->add_option("--fraction", fraction, "Fraction of the training split (whole maps)");
  ft->add_option("--registry", registry, "Checkpoint directory (default: PMNET_REGISTRY)");
  ftf.add(ft);

  // sweep
  auto* sw = app.add_subcommand("sweep", "Data-fraction sweep over pre-trained options");
  std::vector<std::string> sw_pretrained{"none"};
  std::vector<double> sw_fractions{0.1, 0.2, 0.5, 0.9};
  std::vector<std::uint64_t> sw_seeds{0};
  std::vector<double> sw_thresholds{0.1, 0.03};
  TrainFlags swf;
  sw->add_option("--data", data, "Dataset root (default: PMNET_DATASET_ROOT)");
  sw->add_option("--out", out, "Output directory")->required();
  sw->add_option("--pretrained", sw_pretrained, "Options to compare (checkpoint, registry id or none)");
  sw->add_option("--fractions", sw_fractions, "Training fractions in (0, 1]");
  sw->add_option("--seeds", sw_seeds, "Seeds per (option, fraction)");
  sw->add_option("--thresholds", sw_thresholds, "RMSE levels for steps-to-threshold");
  sw->add_option("--registry", registry, "Checkpoint directory (default: PMNET_REGISTRY)");
  swf.add(sw);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Metric report for a checkpoint or baseline on a split");
  std::string ev_model, ev_split = "val", ev_roi = "intersection";
  int ev_render = 0;
  ev->add_option("--data", data, "Dataset root (default: PMNET_DATASET_ROOT)");
  ev->add_option("--model", ev_model, "Checkpoint path, registry id, 3gpp or raylaunch")->required();
  ev->add_option("--split", ev_split, "train or val")->check(CLI::IsMember({"train", "val", "TRAIN", "VAL"}));
  ev->add_option("--out", out, "Output directory")->required();
  ev->add_option("--registry", registry, "Checkpoint directory (default: PMNET_REGISTRY)");
  ev->add_option("--roi-mode", ev_roi, "Channel error pixels: intersection or gt")
      ->check(CLI::IsMember({"intersection", "gt"}));
  ev->add_option("--render", ev_render, "Render pred | gt | difference for the first N samples");

  // predict
  auto* pr = app.add_subcommand("predict", "Predict one pathloss map (same path as POST /predict)");
  std::string pr_map, pr_png, pr_tx, pr_model, pr_json;
  double pr_mpp = 1.0;
  auto* map_opt = pr->add_option("--map-id", pr_map, "Map id under the dataset root");
  auto* png_opt = pr->add_option("--map-png", pr_png, "Inline map PNG (255 free, 0 building, 128 foliage)");
  map_opt->excludes(png_opt);
  pr->add_option("--meters-per-pixel", pr_mpp, "Pixel scale of an inline map");
  pr->add_option("--data", data, "Dataset root (default: PMNET_DATASET_ROOT)");
  pr->add_option("--registry", registry, "Checkpoint directory (default: PMNET_REGISTRY)");
  pr->add_option("--tx", pr_tx, "TX pixel as x,y")->required();
  pr->add_option("--model", pr_model, "Registry id, 3gpp or raylaunch")->required();
  pr->add_option("--out", out, "Gray PNG to write")->required();
  pr->add_option("--json", pr_json, "Also write the full response JSON here");

  // serve
  auto* sv = app.add_subcommand("serve", "HTTP inference service");
  std::string host = "127.0.0.1";
  int port = 8080, threads = 4;
  sv->add_option("--host", host, "Bind address");
  sv->add_option("--port", port, "Port (0 picks a free one)");
  sv->add_option("--data", data, "Dataset root (default: PMNET_DATASET_ROOT)");
  sv->add_option("--registry", registry, "Checkpoint directory (default: PMNET_REGISTRY)");
  sv->add_option("--threads", threads, "Worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen)
      return cmd_generate(gen_out, gen_preset, gen_config, gen_maps, gen_tpm, gen_seed, gen_generator, gen_name,
                          gen_prep, train_fraction, split_seed);
    if (*pre) return cmd_preprocess(pre_root, pre_prep, train_fraction, split_seed);
    if (*tr) return cmd_train(dataset_root(data), out, tf, "none", 1.0, "");
    if (*ft) return cmd_train(dataset_root(data), out, ftf, pretrained, fraction, registry);
    if (*sw)
      return cmd_sweep(dataset_root(data), out, swf, sw_pretrained, sw_fractions, sw_seeds, sw_thresholds, registry);
    if (*ev) return cmd_evaluate(dataset_root(data), ev_model, ev_split, out, registry, ev_roi, ev_render);
    if (*pr) {
      if (pr_map.empty() == pr_png.empty()) throw UsageError("give exactly one of --map-id and --map-png");
      return cmd_predict(data, registry, pr_map, pr_png, pr_mpp, pr_tx, pr_model, out, pr_json);
    }
    if (*sv) return cmd_serve(host, port, data, registry, threads);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const app::RequestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const model::CheckpointError& e) {
    std::cerr << "error: incompatible checkpoint: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
