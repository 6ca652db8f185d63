#include "pmnet/propagation/pathloss_grid.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

#include "pmnet/common/image.hpp"

namespace pmnet::propagation {
namespace {

constexpr char kMagic[4] = {'P', 'L', 'G', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

}  // namespace

PathlossGrid make_grid_for(const geo::BuildingMap& map, const geo::TxLocation& tx) {
  PathlossGrid grid(map.size(), map.size());
  grid.map_id = map.map_id();
  grid.tx = tx.pos;
  for (int y = 0; y < map.size(); ++y)
    for (int x = 0; x < map.size(); ++x) grid.roi_mask[grid.index(x, y)] = map.is_roi({x, y}) ? 1 : 0;
  return grid;
}

void write_grid(const std::filesystem::path& path, const PathlossGrid& grid, const nlohmann::json& metadata) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + grid.values.size() * 5);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, static_cast<std::uint32_t>(grid.width));
  put_u32(out, static_cast<std::uint32_t>(grid.height));
  for (const float v : grid.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  out.insert(out.end(), grid.roi_mask.begin(), grid.roi_mask.end());
  write_file_bytes(path, out);

  nlohmann::json meta = metadata;
  meta["map_id"] = grid.map_id;
  meta["tx"] = {{"x", grid.tx.x}, {"y", grid.tx.y}};
  meta["width"] = grid.width;
  meta["height"] = grid.height;
  meta["units"] = "dBm";
  auto sidecar = path;
  sidecar.replace_extension(".json");
  write_text_file(sidecar, meta.dump(2) + "\n");
}

PathlossGrid read_grid(const std::filesystem::path& path) {
  const auto in = read_file_bytes(path);
  if (in.size() < 12 || std::memcmp(in.data(), kMagic, 4) != 0)
    throw std::runtime_error("read_grid: bad header in " + path.string());
  const auto w = static_cast<int>(get_u32(in, 4));
  const auto h = static_cast<int>(get_u32(in, 8));
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (in.size() != 12 + n * 5) throw std::runtime_error("read_grid: size mismatch in " + path.string());
  PathlossGrid grid(w, h);
  for (std::size_t i = 0; i < n; ++i) grid.values[i] = std::bit_cast<float>(get_u32(in, 12 + 4 * i));
  std::memcpy(grid.roi_mask.data(), in.data() + 12 + 4 * n, n);

  auto sidecar = path;
  sidecar.replace_extension(".json");
  if (std::filesystem::exists(sidecar)) {
    const auto meta = nlohmann::json::parse(read_text_file(sidecar));
    grid.map_id = meta.value("map_id", std::string{});
    if (meta.contains("tx")) grid.tx = {meta["tx"].value("x", 0), meta["tx"].value("y", 0)};
  }
  return grid;
}

}  // namespace pmnet::propagation
