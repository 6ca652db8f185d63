#include "pmnet/dataset/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "pmnet/common/random.hpp"
#include "pmnet/geo/map_generator.hpp"
#include "pmnet/propagation/pathloss_grid.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pmnet::dataset {

const char* split_name(Split s) { return s == Split::Train ? "train" : "val"; }

Split parse_split(const std::string& name) {
  if (name == "train" || name == "TRAIN") return Split::Train;
  if (name == "val" || name == "VAL") return Split::Val;
  throw std::invalid_argument("unknown split: " + name);
}

std::vector<std::string> DatasetManifest::map_ids() const {
  std::set<std::string> ids;
  for (const auto& s : samples) ids.insert(s.map_id);
  return {ids.begin(), ids.end()};
}

std::vector<SampleRef> DatasetManifest::in_split(Split s) const {
  std::vector<SampleRef> out;
  for (const auto& ref : samples) {
    const auto it = split.find(ref.map_id);
    if (it != split.end() && it->second == s) out.push_back(ref);
  }
  return out;
}

void DatasetManifest::validate() const {
  // split is a map keyed by map_id, so one id cannot hold two values; the
  // check that matters is that every sample's map is assigned
  if (split.empty()) return;
  for (const auto& ref : samples)
    if (!split.contains(ref.map_id))
      throw std::invalid_argument("manifest: sample " + ref.sample_id + " has unassigned map " + ref.map_id);
}

void to_json(json& j, const DatasetManifest& m) {
  json samples = json::array();
  for (const auto& s : m.samples) {
    samples.push_back({{"sample_id", s.sample_id},
                       {"scene_id", s.scene_id},
                       {"map_id", s.map_id},
                       {"crop_index", s.crop_index},
                       {"aug_tag", s.aug_tag},
                       {"dir", s.dir}});
  }
  json split = json::object();
  for (const auto& [id, s] : m.split) split[id] = split_name(s);
  j = json{{"dataset_id", m.dataset_id},
           {"normalization", {{"min_dbm", m.norm_min_dbm}, {"max_dbm", m.norm_max_dbm}}},
           {"split", split},
           {"samples", samples},
           {"provenance", m.provenance}};
}

void from_json(const json& j, DatasetManifest& m) {
  m = DatasetManifest{};
  m.dataset_id = j.value("dataset_id", "");
  if (j.contains("normalization")) {
    m.norm_min_dbm = j["normalization"].value("min_dbm", -254.0);
    m.norm_max_dbm = j["normalization"].value("max_dbm", 0.0);
  }
  for (const auto& s : j.at("samples")) {
    SampleRef r;
    r.sample_id = s.at("sample_id").get<std::string>();
    r.scene_id = s.value("scene_id", "");
    r.map_id = s.at("map_id").get<std::string>();
    r.crop_index = s.value("crop_index", 0);
    r.aug_tag = s.value("aug_tag", "orig");
    r.dir = s.at("dir").get<std::string>();
    m.samples.push_back(std::move(r));
  }
  if (j.contains("split"))
    for (const auto& [id, v] : j["split"].items()) m.split[id] = parse_split(v.get<std::string>());
  if (j.contains("provenance")) m.provenance = j["provenance"];
}

void save_manifest(const fs::path& root, const DatasetManifest& m) {
  m.validate();
  fs::create_directories(root);
  write_text_file(root / "manifest.json", json(m).dump(2) + "\n");
}

DatasetManifest load_manifest(const fs::path& root) {
  auto m = json::parse(read_text_file(root / "manifest.json")).get<DatasetManifest>();
  m.validate();
  return m;
}

DatasetManifest split(const DatasetManifest& manifest, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split: train_fraction must be in (0, 1)");
  auto ids = manifest.map_ids();
  if (ids.size() < 2) throw std::domain_error("split: need at least two distinct maps");
  Rng rng(mix_seed(seed, 0x5171));
  rng.shuffle(ids.begin(), ids.end());
  const auto n = static_cast<long>(ids.size());
  const long n_train = std::clamp(std::lround(train_fraction * static_cast<double>(n)), 1L, n - 1);
  DatasetManifest out = manifest;
  out.split.clear();
  for (long i = 0; i < n; ++i) out.split[ids[i]] = i < n_train ? Split::Train : Split::Val;
  return out;
}

std::vector<SampleRef> subsample_by_map(const DatasetManifest& manifest, Split s, double fraction,
                                        std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("subsample_by_map: fraction must be in (0, 1]");
  const auto refs = manifest.in_split(s);
  std::map<std::string, std::vector<SampleRef>> by_map;
  for (const auto& r : refs) by_map[r.map_id].push_back(r);
  std::vector<std::string> ids;
  for (const auto& [id, _] : by_map) ids.push_back(id);
  if (ids.empty()) return {};
  Rng rng(mix_seed(seed, 0xF4AC));
  rng.shuffle(ids.begin(), ids.end());
  const double target = fraction * static_cast<double>(refs.size());
  std::vector<SampleRef> out;
  for (const auto& id : ids) {
    const auto& group = by_map[id];
    // take the next map while doing so moves the count closer to the target
    if (!out.empty() && std::abs(out.size() + group.size() - target) >= std::abs(out.size() - target)) break;
    out.insert(out.end(), group.begin(), group.end());
  }
  return out;
}

namespace {

json sample_meta(const GraySample& s) {
  return {{"sample_id", s.sample_id},         {"scene_id", s.scene_id},
          {"map_id", s.map_id},               {"crop_index", s.crop_index},
          {"aug_tag", s.aug_tag},             {"tx", {s.tx.x, s.tx.y}},
          {"meters_per_pixel", s.meters_per_pixel}, {"tx_dilation", s.tx_dilation},
          {"size", s.size()}};
}

}  // namespace

SampleRef write_sample(const fs::path& root, const GraySample& sample) {
  check_sample(sample);
  SampleRef ref{sample.sample_id, sample.scene_id, sample.map_id, sample.crop_index, sample.aug_tag,
                "samples/" + sample.sample_id};
  const auto dir = root / ref.dir;
  fs::create_directories(dir);
  write_png(dir / "map.png", sample.map_channel);
  write_png(dir / "tx.png", sample.tx_channel);
  write_png(dir / "target.png", sample.target);
  write_text_file(dir / "meta.json", sample_meta(sample).dump(2) + "\n");
  return ref;
}

GraySample read_sample(const fs::path& root, const SampleRef& ref) {
  const auto dir = root / ref.dir;
  const auto meta = json::parse(read_text_file(dir / "meta.json"));
  GraySample s;
  s.map_channel = read_png_gray(dir / "map.png");
  s.tx_channel = read_png_gray(dir / "tx.png");
  s.target = read_png_gray(dir / "target.png");
  s.sample_id = meta.at("sample_id").get<std::string>();
  s.scene_id = meta.value("scene_id", "");
  s.map_id = meta.at("map_id").get<std::string>();
  s.crop_index = meta.value("crop_index", 0);
  s.aug_tag = meta.value("aug_tag", "orig");
  s.tx = {meta.at("tx").at(0).get<int>(), meta.at("tx").at(1).get<int>()};
  s.meters_per_pixel = meta.value("meters_per_pixel", 1.0);
  s.tx_dilation = meta.value("tx_dilation", 0);
  check_sample(s);
  return s;
}

void write_scene(const fs::path& root, const Scene& scene, const json& generator_meta) {
  const auto dir = root / "scenes" / scene.scene_id;
  fs::create_directories(dir);
  geo::write_map(dir / "map.png", scene.map);
  json meta = generator_meta;
  meta["scene_id"] = scene.scene_id;
  meta["generator"] = scene.generator;
  meta["tx_height_m"] = scene.tx.h_bs;
  propagation::write_grid(dir / "grid.plg", scene.grid, meta);
  write_png(dir / "gray.png", grid_to_gray(scene.grid));
}

Scene read_scene(const fs::path& root, const std::string& scene_id) {
  const auto dir = root / "scenes" / scene_id;
  Scene s;
  s.scene_id = scene_id;
  s.map = geo::read_map(dir / "map.png");
  s.grid = propagation::read_grid(dir / "grid.plg");
  const auto meta = json::parse(read_text_file(dir / "grid.json"));
  const auto& md = meta.contains("metadata") ? meta["metadata"] : meta;
  s.generator = md.value("generator", "");
  s.tx = {s.grid.tx, md.value("tx_height_m", geo::kDefaultBsHeight)};
  return s;
}

std::vector<std::string> list_scenes(const fs::path& root) {
  std::vector<std::string> ids;
  const auto dir = root / "scenes";
  if (!fs::exists(dir)) return ids;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "grid.plg")) ids.push_back(e.path().filename().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace pmnet::dataset
