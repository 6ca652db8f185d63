#include "pmnet/dataset/builder.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "pmnet/common/parallel.hpp"
#include "pmnet/common/random.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pmnet::dataset {

namespace {

std::string padded(int value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
  return s;
}

}  // namespace

void to_json(json& j, const ScenarioConfig& c) {
  j = json{{"name", c.name},
           {"generator", c.generator},
           {"n_maps", c.n_maps},
           {"tx_per_map", c.tx_per_map},
           {"seed", c.seed},
           {"map", c.map},
           {"density_jitter", c.density_jitter},
           {"tx_margin", c.tx_margin},
           {"propagation", c.propagation},
           {"raylaunch", c.raylaunch},
           {"rx_dropout", c.rx_dropout}};
}

void from_json(const json& j, ScenarioConfig& c) {
  if (j.contains("preset")) c = scenario_preset(j["preset"].get<std::string>());
  c.name = j.value("name", c.name);
  c.generator = j.value("generator", c.generator);
  c.n_maps = j.value("n_maps", c.n_maps);
  c.tx_per_map = j.value("tx_per_map", c.tx_per_map);
  c.seed = j.value("seed", c.seed);
  if (j.contains("map")) from_json(j["map"], c.map);
  c.density_jitter = j.value("density_jitter", c.density_jitter);
  c.tx_margin = j.value("tx_margin", c.tx_margin);
  if (j.contains("propagation")) from_json(j["propagation"], c.propagation);
  if (j.contains("raylaunch")) from_json(j["raylaunch"], c.raylaunch);
  c.rx_dropout = j.value("rx_dropout", c.rx_dropout);
}

ScenarioConfig scenario_preset(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  c.raylaunch.max_reflections = 6;
  if (name == "urban_a") {
    c.map.size = 128;
    c.map.meters_per_pixel = 1.7;
    c.map.density = 0.25;
    c.map.block_min = 6;
    c.map.block_max = 16;
    c.map.street_width = 3;
    c.map.foliage_fraction = 0.0;
  } else if (name == "urban_b") {
    c.map.size = 128;
    c.map.meters_per_pixel = 0.85;
    c.map.density = 0.4;
    c.map.block_min = 10;
    c.map.block_max = 28;
    c.map.street_width = 2;
    c.map.foliage_fraction = 0.05;
    c.seed = 2;
  } else if (name == "city_256") {
    c.map.size = 256;
    c.map.meters_per_pixel = 0.86;
    c.map.density = 0.3;
    c.map.block_min = 8;
    c.map.block_max = 30;
    c.map.street_width = 3;
    c.raylaunch.n_rays = 1440;
  } else {
    throw std::invalid_argument("unknown scenario preset: " + name);
  }
  return c;
}

int scene_count(const ScenarioConfig& cfg) { return cfg.n_maps * cfg.tx_per_map; }

geo::BuildingMap generate_scenario_map(const ScenarioConfig& cfg, int map_index) {
  if (map_index < 0 || map_index >= cfg.n_maps) throw std::out_of_range("generate_scenario_map: bad map index");
  Rng rng(mix_seed(cfg.seed, 2 * static_cast<std::uint64_t>(map_index)));
  geo::MapGenParams p = cfg.map;
  p.seed = rng.next();
  p.density = std::clamp(p.density + rng.uniform(-cfg.density_jitter, cfg.density_jitter), 0.0, 0.95);
  auto map = geo::generate_map(p);
  map.set_map_id(cfg.name + "_m" + padded(map_index, 4));
  return map;
}

propagation::PathlossGrid simulate(const std::string& generator, const geo::BuildingMap& map,
                                   const geo::TxLocation& tx, const propagation::PropagationConfig& prop,
                                   const propagation::RayLaunchConfig& rl, const std::vector<std::uint8_t>* known) {
  propagation::PathlossGrid grid;
  std::vector<std::uint8_t> mask;
  if (generator == "3gpp") {
    grid = propagation::pathloss_map_3gpp(map, tx, prop);
    mask = grid.roi_mask;
  } else if (generator == "raylaunch") {
    grid = propagation::ray_launch(map, tx, prop, rl);
    mask = reached_mask(grid, rl.floor_dbm);
  } else {
    throw std::invalid_argument("unknown generator: " + generator);
  }
  if (known) {
    if (known->size() != mask.size()) throw std::invalid_argument("simulate: known mask size mismatch");
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = mask[i] && (*known)[i];
  }
  bool any_missing = false;
  for (std::size_t i = 0; i < mask.size(); ++i) any_missing |= grid.roi_mask[i] && !mask[i];
  return any_missing ? interpolate_missing(grid, mask) : grid;
}

namespace {

Scene scene_on_map(const ScenarioConfig& cfg, const geo::BuildingMap& map, int index) {
  Scene s;
  s.scene_id = cfg.name + "_s" + padded(index, 5);
  s.map = map;
  s.generator = cfg.generator;
  const auto tx_seed = mix_seed(cfg.seed, 2 * static_cast<std::uint64_t>(index) + 1);
  s.tx = geo::place_tx(map, tx_seed, cfg.tx_margin, cfg.propagation.h_bs);

  std::vector<std::uint8_t> dropped;
  if (cfg.rx_dropout > 0.0) {
    dropped.assign(static_cast<std::size_t>(map.size()) * map.size(), 1);
    Rng rng(mix_seed(tx_seed, 0xD509));
    for (auto& k : dropped)
      if (rng.uniform01() < cfg.rx_dropout) k = 0;
    dropped[static_cast<std::size_t>(s.tx.pos.y) * map.size() + s.tx.pos.x] = 1;
  }
  s.grid = simulate(cfg.generator, map, s.tx, cfg.propagation, cfg.raylaunch, dropped.empty() ? nullptr : &dropped);
  return s;
}

}  // namespace

Scene generate_scene(const ScenarioConfig& cfg, int index) {
  if (index < 0 || index >= scene_count(cfg)) throw std::out_of_range("generate_scene: bad scene index");
  return scene_on_map(cfg, generate_scenario_map(cfg, index / cfg.tx_per_map), index);
}

std::vector<Scene> generate_scenes(const ScenarioConfig& cfg) {
  if (cfg.n_maps < 1 || cfg.tx_per_map < 1) throw std::invalid_argument("generate_scenes: need n_maps, tx_per_map >= 1");
  cfg.propagation.validate();
  if (cfg.generator == "raylaunch") cfg.raylaunch.validate(cfg.propagation);
  std::vector<geo::BuildingMap> maps(cfg.n_maps);
  parallel_for(maps.size(), [&](std::size_t m) { maps[m] = generate_scenario_map(cfg, static_cast<int>(m)); });
  std::vector<Scene> scenes(scene_count(cfg));
  parallel_for(scenes.size(), [&](std::size_t i) {
    scenes[i] = scene_on_map(cfg, maps[i / cfg.tx_per_map], static_cast<int>(i));
  });
  return scenes;
}

void to_json(json& j, const PreprocessConfig& c) {
  j = json{{"crop", c.crop},
           {"crop_size", c.crop_cfg.crop_size},
           {"output_size", c.crop_cfg.output_size},
           {"stride", c.crop_cfg.stride},
           {"rotations", c.augment.rotations},
           {"flips", c.augment.flips},
           {"tx_dilation", c.tx_dilation}};
}

void from_json(const json& j, PreprocessConfig& c) {
  c.crop = j.value("crop", c.crop);
  c.crop_cfg.crop_size = j.value("crop_size", c.crop_cfg.crop_size);
  c.crop_cfg.output_size = j.value("output_size", c.crop_cfg.output_size);
  c.crop_cfg.stride = j.value("stride", c.crop_cfg.stride);
  c.augment.rotations = j.value("rotations", c.augment.rotations);
  c.augment.flips = j.value("flips", c.augment.flips);
  c.tx_dilation = j.value("tx_dilation", c.tx_dilation);
  c.crop_cfg.tx_dilation = c.tx_dilation;
}

std::vector<GraySample> preprocess_scene(const Scene& scene, const PreprocessConfig& cfg) {
  std::vector<GraySample> base;
  if (cfg.crop) {
    auto crop_cfg = cfg.crop_cfg;
    crop_cfg.tx_dilation = cfg.tx_dilation;
    base = crop_augment(scene, crop_cfg);
  } else {
    base.push_back(make_sample(scene, cfg.tx_dilation));
  }
  if (cfg.augment.rotations || cfg.augment.flips) return rotate_flip_augment(base, cfg.augment);
  return base;
}

namespace {

DatasetManifest refs_manifest(const std::vector<GraySample>& samples) {
  DatasetManifest m;
  for (const auto& s : samples) m.samples.push_back({s.sample_id, s.scene_id, s.map_id, s.crop_index, s.aug_tag, {}});
  return m;
}

}  // namespace

SplitSets split_samples(const std::vector<GraySample>& samples, double train_fraction, std::uint64_t seed) {
  const auto m = split(refs_manifest(samples), train_fraction, seed);
  SplitSets out;
  for (const auto& s : samples)
    (m.split.at(s.map_id) == Split::Train ? out.train : out.val).samples.push_back(s);
  return out;
}

SampleSet subsample(const SampleSet& set, double fraction, std::uint64_t seed) {
  if (fraction >= 1.0) return set;
  auto m = refs_manifest(set.samples);
  for (const auto& id : m.map_ids()) m.split[id] = Split::Train;
  std::set<std::string> keep;
  for (const auto& r : subsample_by_map(m, Split::Train, fraction, seed)) keep.insert(r.sample_id);
  SampleSet out;
  for (const auto& s : set.samples)
    if (keep.contains(s.sample_id)) out.samples.push_back(s);
  return out;
}

namespace {

DatasetManifest write_samples(const fs::path& root, const std::vector<Scene>& scenes, const PreprocessConfig& prep,
                              double train_fraction, std::uint64_t split_seed, const std::string& dataset_id,
                              json provenance) {
  fs::remove_all(root / "samples");
  std::vector<std::vector<SampleRef>> refs(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t i) {
    for (const auto& s : preprocess_scene(scenes[i], prep)) refs[i].push_back(write_sample(root, s));
  });
  DatasetManifest m;
  m.dataset_id = dataset_id;
  for (auto& r : refs) m.samples.insert(m.samples.end(), r.begin(), r.end());
  provenance["preprocess"] = prep;
  provenance["train_fraction"] = train_fraction;
  provenance["split_seed"] = split_seed;
  m.provenance = std::move(provenance);
  m = split(m, train_fraction, split_seed);
  save_manifest(root, m);
  return m;
}

}  // namespace

DatasetManifest build_dataset(const fs::path& root, const ScenarioConfig& scenario, const PreprocessConfig& prep,
                              double train_fraction, std::uint64_t split_seed) {
  const auto scenes = generate_scenes(scenario);
  fs::remove_all(root / "scenes");
  const json gen_meta{{"scenario", scenario.name}, {"propagation", scenario.propagation}};
  for (const auto& s : scenes) write_scene(root, s, gen_meta);
  return write_samples(root, scenes, prep, train_fraction, split_seed, scenario.name, json{{"scenario", scenario}});
}

DatasetManifest rebuild_samples(const fs::path& root, const PreprocessConfig& prep, double train_fraction,
                                std::uint64_t split_seed) {
  json provenance = json::object();
  std::string dataset_id = root.filename().string();
  if (fs::exists(root / "manifest.json")) {
    const auto old = load_manifest(root);
    if (old.provenance.contains("scenario")) provenance["scenario"] = old.provenance["scenario"];
    if (!old.dataset_id.empty()) dataset_id = old.dataset_id;
  }
  const auto ids = list_scenes(root);
  if (ids.empty()) throw std::runtime_error("rebuild_samples: no scenes under " + root.string());
  std::vector<Scene> scenes;
  for (const auto& id : ids) scenes.push_back(read_scene(root, id));
  return write_samples(root, scenes, prep, train_fraction, split_seed, dataset_id, provenance);
}

SampleSet load_split(const fs::path& root, const DatasetManifest& manifest, Split s) {
  const auto refs = manifest.in_split(s);
  SampleSet out;
  out.samples.resize(refs.size());
  parallel_for(refs.size(), [&](std::size_t i) { out.samples[i] = read_sample(root, refs[i]); });
  return out;
}

}  // namespace pmnet::dataset
