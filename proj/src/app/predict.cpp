#include "pmnet/app/predict.hpp"

#include <algorithm>
#include <chrono>

#include "pmnet/dataset/builder.hpp"
#include "pmnet/dataset/gray.hpp"
#include "pmnet/eval/predictors.hpp"
#include "pmnet/model/checkpoint.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pmnet::app {

// ---- registry ---------------------------------------------------------------

ModelRegistry::ModelRegistry(std::optional<fs::path> dir) {
  entries_.push_back({"3gpp", "baseline", {}, {{"description", "3GPP UMi street canyon with map-derived LoS"}}});
  entries_.push_back({"raylaunch", "baseline", {}, {{"description", "2D ray launcher, unreached pixels infilled"}}});
  if (!dir) return;
  if (!fs::is_directory(*dir)) throw std::invalid_argument("model registry is not a directory: " + dir->string());
  std::vector<ModelEntry> found;
  for (const auto& e : fs::recursive_directory_iterator(*dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".ckpt") continue;
    auto rel = fs::relative(e.path(), *dir);
    rel.replace_extension();
    const auto header = model::read_checkpoint_header(e.path());
    found.push_back({rel.generic_string(),
                     "pmnet",
                     e.path(),
                     {{"config", header.at("config")}, {"metadata", header.value("metadata", json::object())}}});
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  entries_.insert(entries_.end(), found.begin(), found.end());
}

const ModelEntry* ModelRegistry::find(const std::string& id) const {
  for (const auto& e : entries_)
    if (e.id == id) return &e;
  return nullptr;
}

std::shared_ptr<const model::PmnetModel> ModelRegistry::model(const std::string& id) const {
  const auto* e = find(id);
  if (!e || e->kind != "pmnet") throw RequestError(404, "unknown model: " + id);
  std::lock_guard lock(mu_);
  auto& slot = loaded_[id];
  if (!slot) slot = std::shared_ptr<const model::PmnetModel>(model::load_checkpoint(e->path).model.release());
  return slot;
}

void ModelRegistry::load_all() const {
  for (const auto& e : entries_)
    if (e.kind == "pmnet") model(e.id);
}

std::optional<fs::path> ModelRegistry::resolve_checkpoint(const std::optional<fs::path>& dir,
                                                          const std::string& id_or_path) {
  if (id_or_path.empty() || id_or_path == "none") return std::nullopt;
  if (fs::is_regular_file(id_or_path)) return fs::path(id_or_path);
  if (dir) {
    auto p = *dir / (id_or_path + ".ckpt");
    if (fs::is_regular_file(p)) return p;
  }
  throw std::invalid_argument("no checkpoint named " + id_or_path +
                              (dir ? " under " + dir->string() : std::string(" (no registry directory set)")));
}

// ---- maps -------------------------------------------------------------------

MapStore::MapStore(const fs::path& root) : root_(root) {
  if (!fs::is_directory(root)) throw std::invalid_argument("dataset root not found: " + root.string());
  if (fs::exists(root / "manifest.json")) {
    const auto manifest = dataset::load_manifest(root);
    if (manifest.provenance.contains("scenario")) {
      const auto sc = manifest.provenance["scenario"].get<dataset::ScenarioConfig>();
      prop_ = sc.propagation;
      rl_ = sc.raylaunch;
    }
  }
  std::map<std::string, std::size_t> index;
  for (const auto& scene_id : dataset::list_scenes(root)) {
    const auto dir = root / "scenes" / scene_id;
    const auto map_meta = json::parse(read_text_file(dir / "map.json"));
    const auto grid_meta = json::parse(read_text_file(dir / "grid.json"));
    const auto map_id = map_meta.at("map_id").get<std::string>();
    auto [it, fresh] = index.try_emplace(map_id, maps_.size());
    if (fresh) {
      MapInfo info;
      info.map_id = map_id;
      info.scene_id = scene_id;
      info.size = grid_meta.at("width").get<int>();
      info.meters_per_pixel = map_meta.at("meters_per_pixel").get<double>();
      info.default_tx = {grid_meta.at("tx").at("x").get<int>(), grid_meta.at("tx").at("y").get<int>()};
      maps_.push_back(info);
    }
    maps_[it->second].scene_ids.push_back(scene_id);
  }
}

const MapInfo* MapStore::find(const std::string& map_id) const {
  for (const auto& m : maps_)
    if (m.map_id == map_id) return &m;
  return nullptr;
}

geo::BuildingMap MapStore::load(const std::string& map_id) const {
  const auto* info = find(map_id);
  if (!info) throw RequestError(404, "unknown map: " + map_id);
  return geo::read_map(root_ / "scenes" / info->scene_id / "map.png");
}

GrayImage MapStore::thumbnail(const std::string& map_id, int max_size) const {
  const auto img = geo::map_to_image(load(map_id));
  const int step = std::max(1, (img.width + max_size - 1) / max_size);
  GrayImage out((img.width + step - 1) / step, (img.height + step - 1) / step);
  // a block shows as building if any of its cells is one
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      std::uint8_t v = 255;
      for (int dy = 0; dy < step && y * step + dy < img.height; ++dy)
        for (int dx = 0; dx < step && x * step + dx < img.width; ++dx)
          v = std::min(v, img.at(x * step + dx, y * step + dy));
      out.at(x, y) = v;
    }
  return out;
}

// ---- requests ---------------------------------------------------------------

PredictRequest parse_predict_request(const json& j) {
  if (!j.is_object()) throw RequestError(400, "request body must be a JSON object");
  PredictRequest req;
  try {
    req.model_id = j.at("model_id").get<std::string>();
    const auto& tx = j.at("tx");
    if (tx.is_array() && tx.size() == 2)
      req.tx = {tx[0].get<int>(), tx[1].get<int>()};
    else if (tx.is_object())
      req.tx = {tx.at("x").get<int>(), tx.at("y").get<int>()};
    else
      throw RequestError(400, "tx must be [x, y] or {\"x\": .., \"y\": ..}");
    if (j.contains("map_id")) req.map_id = j["map_id"].get<std::string>();
    if (j.contains("map_png")) {
      try {
        req.map_image = decode_png_gray(base64_decode(j["map_png"].get<std::string>()));
      } catch (const RequestError&) {
        throw;
      } catch (const std::exception& e) {
        throw RequestError(400, std::string("map_png is not a valid base64 PNG: ") + e.what());
      }
    }
    req.meters_per_pixel = j.value("meters_per_pixel", req.meters_per_pixel);
  } catch (const json::exception& e) {
    throw RequestError(400, std::string("malformed predict request: ") + e.what());
  }
  if (req.map_id.has_value() == req.map_image.has_value())
    throw RequestError(400, "give exactly one of map_id and map_png");
  return req;
}

namespace {

geo::BuildingMap request_map(const MapStore& maps, const PredictRequest& req) {
  if (req.map_id) return maps.load(*req.map_id);
  if (!req.map_image) throw RequestError(400, "no map given");
  const auto& img = *req.map_image;
  if (img.width != img.height) throw RequestError(400, "inline map must be square");
  if (img.width < 1 || img.width > kMaxInlineMapSize)
    throw RequestError(400, "inline map size must be 1.." + std::to_string(kMaxInlineMapSize));
  if (!(req.meters_per_pixel > 0.0)) throw RequestError(400, "meters_per_pixel must be positive");
  auto map = geo::map_from_image(img, req.meters_per_pixel, "inline");
  try {
    map.validate();
  } catch (const std::exception& e) {
    throw RequestError(400, std::string("invalid inline map: ") + e.what());
  }
  return map;
}

GrayImage roi_of(const GrayImage& gray) {
  GrayImage roi(gray.width, gray.height);
  for (std::size_t i = 0; i < gray.pixels.size(); ++i) roi.pixels[i] = gray.pixels[i] == 0 ? 0 : 255;
  return roi;
}

}  // namespace

PredictResponse predict(const ModelRegistry& models, const MapStore& maps, const PredictRequest& req) {
  const auto* entry = models.find(req.model_id);
  if (!entry) throw RequestError(404, "unknown model: " + req.model_id);
  const auto map = request_map(maps, req);
  if (!map.in_bounds(req.tx))
    throw RequestError(400, "tx (" + std::to_string(req.tx.x) + ", " + std::to_string(req.tx.y) + ") is outside the " +
                                std::to_string(map.size()) + " px map");
  if (!map.is_free(req.tx))
    throw RequestError(400, "tx (" + std::to_string(req.tx.x) + ", " + std::to_string(req.tx.y) +
                                ") is not on a FREE cell");

  PredictResponse r;
  r.model_id = req.model_id;
  r.map_id = map.map_id();
  r.tx = req.tx;
  const auto start = std::chrono::steady_clock::now();
  if (entry->kind == "baseline") {
    const auto& prop = maps.propagation();
    r.gray = dataset::grid_to_gray(dataset::simulate(entry->id, map, {req.tx, prop.h_bs}, prop, maps.raylaunch()));
  } else {
    const auto net = models.model(entry->id);
    if (net->config().input_size != map.size())
      throw RequestError(400, "model " + entry->id + " takes " + std::to_string(net->config().input_size) +
                                  " px maps, got " + std::to_string(map.size()));
    dataset::GraySample s;
    s.map_channel = geo::map_to_image(map);
    const int dilation = entry->info.at("metadata").value("tx_dilation", 0);
    s.tx_channel = dataset::make_tx_channel(map.size(), req.tx, dilation);
    s.target = GrayImage(map.size(), map.size());
    r.gray = eval::quantize(eval::model_predictor(*net)(s));
  }
  r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  r.roi = roi_of(r.gray);
  return r;
}

json units_json() {
  return {{"gray_building", 0},
          {"gray_min", 1},
          {"gray_max", 255},
          {"dbm_min", -254.0},
          {"dbm_max", 0.0},
          {"dbm_per_gray", 1.0},
          {"dbm_offset", -255.0},
          {"formula", "dBm = gray - 255 for gray >= 1; gray 0 is a building"}};
}

json to_json(const PredictResponse& r) {
  return {{"model_id", r.model_id},
          {"map_id", r.map_id},
          {"tx", {r.tx.x, r.tx.y}},
          {"width", r.gray.width},
          {"height", r.gray.height},
          {"gray_png", base64_encode(encode_png(r.gray))},
          {"roi_png", base64_encode(encode_png(r.roi))},
          {"latency_ms", r.latency_ms},
          {"units", units_json()}};
}

}  // namespace pmnet::app
