#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pmnet/model/pmnet.hpp"

namespace pmnet::model::inline PMNET_NN_ABI {

/// Checkpoint file layout:
///   8 bytes  "PMNETCKP"
///   uint32   format version (little endian)
///   uint64   header length
///   header   JSON: {version, dtype, config, metadata, tensors: [{name, shape, trainable}]}
///   payload  tensors in header order, raw little-endian values of dtype
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_checkpoint(const std::filesystem::path& path, const PmnetModel& model, const nlohmann::json& metadata);

struct LoadedCheckpoint {
  std::unique_ptr<PmnetModel> model;
  nlohmann::json metadata;
};

/// Builds the model from the stored config and loads every tensor.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Reads only the header (config and metadata).
nlohmann::json read_checkpoint_header(const std::filesystem::path& path);

/// Copies the stored tensors into an existing model. Throws
/// CheckpointError when the stored config differs from the model's
/// (init_seed aside) or a tensor is missing or shaped differently.
nlohmann::json load_parameters(const std::filesystem::path& path, PmnetModel& model);

}  // namespace pmnet::model::inline PMNET_NN_ABI
