#include "pmnet/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace pmnet::model::inline PMNET_NN_ABI {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'P', 'M', 'N', 'E', 'T', 'C', 'K', 'P'};
constexpr const char* kDtype = sizeof(Real) == 4 ? "f32" : "f64";

struct Parsed {
  json header;
  std::vector<char> payload;
};

Parsed read_file(const fs::path& path, bool with_payload) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t header_len = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) throw CheckpointError(path.string() + " is not a PMNet checkpoint");
  if (version != kCheckpointVersion)
    throw CheckpointError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw CheckpointError(path.string() + ": truncated header");
  Parsed p;
  p.header = json::parse(text);
  if (with_payload) p.payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return p;
}

// Copies tensors from the payload into the model's entries by name.
void fill(const Parsed& p, PmnetModel& model, const fs::path& path) {
  const std::string dtype = p.header.at("dtype");
  const std::size_t elem = dtype == "f32" ? 4 : dtype == "f64" ? 8 : 0;
  if (elem == 0) throw CheckpointError(path.string() + ": unknown dtype " + dtype);
  std::size_t offset = 0;
  std::size_t loaded = 0;
  for (const auto& t : p.header.at("tensors")) {
    const auto name = t.at("name").get<std::string>();
    const auto dims = t.at("shape").get<std::vector<int>>();
    const Shape shape{dims.at(0), dims.at(1), dims.at(2), dims.at(3)};
    const std::size_t bytes = shape.numel() * elem;
    if (offset + bytes > p.payload.size()) throw CheckpointError(path.string() + ": truncated payload");
    const auto var = model.params().find(name);
    if (!var) throw CheckpointError(path.string() + ": model has no tensor " + name);
    if (!(var->value.shape() == shape))
      throw CheckpointError(path.string() + ": " + name + " is " + shape.str() + ", model expects " +
                            var->value.shape().str());
    const char* src = p.payload.data() + offset;
    for (std::size_t i = 0; i < shape.numel(); ++i) {
      if (elem == 4) {
        float v;
        std::memcpy(&v, src + 4 * i, 4);
        var->value[i] = static_cast<Real>(v);
      } else {
        double v;
        std::memcpy(&v, src + 8 * i, 8);
        var->value[i] = static_cast<Real>(v);
      }
    }
    offset += bytes;
    ++loaded;
  }
  if (loaded != model.params().entries().size())
    throw CheckpointError(path.string() + ": checkpoint holds " + std::to_string(loaded) + " tensors, model has " +
                          std::to_string(model.params().entries().size()));
}

}  // namespace

void save_checkpoint(const fs::path& path, const PmnetModel& model, const json& metadata) {
  json tensors = json::array();
  for (const auto& e : model.params().entries()) {
    const auto& s = e.var->value.shape();
    tensors.push_back({{"name", e.name}, {"shape", {s.n, s.c, s.h, s.w}}, {"trainable", e.trainable}});
  }
  const json header{{"format", "pmnet-checkpoint"},
                    {"version", kCheckpointVersion},
                    {"dtype", kDtype},
                    {"config", model.config()},
                    {"metadata", metadata},
                    {"tensors", tensors}};
  const std::string text = header.dump();
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
    const std::uint32_t version = kCheckpointVersion;
    const std::uint64_t len = text.size();
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& e : model.params().entries())
      out.write(reinterpret_cast<const char*>(e.var->value.data()),
                static_cast<std::streamsize>(e.var->value.numel() * sizeof(Real)));
    if (!out) throw CheckpointError("short write to " + path.string());
  }
  fs::rename(tmp, path);
}

json read_checkpoint_header(const fs::path& path) { return read_file(path, false).header; }

LoadedCheckpoint load_checkpoint(const fs::path& path) {
  const auto p = read_file(path, true);
  LoadedCheckpoint out;
  out.model = std::make_unique<PmnetModel>(p.header.at("config").get<PmnetConfig>());
  fill(p, *out.model, path);
  out.metadata = p.header.value("metadata", json::object());
  return out;
}

json load_parameters(const fs::path& path, PmnetModel& model) {
  const auto p = read_file(path, true);
  auto stored = p.header.at("config").get<PmnetConfig>();
  stored.init_seed = model.config().init_seed;
  if (!(stored == model.config()))
    throw CheckpointError(path.string() + ": config " + p.header.at("config").dump() +
                          " is not compatible with the model config " + json(model.config()).dump());
  fill(p, model, path);
  return p.header.value("metadata", json::object());
}

}  // namespace pmnet::model::inline PMNET_NN_ABI
