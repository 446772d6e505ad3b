#pragma once

#include <filesystem>
#include <string_view>

#include "dsakt/datastore.hpp"
#include "dsakt/model.hpp"

namespace dsakt {

/// File layout: the 7 magic bytes "DSAKT1\n", a little-endian uint64 header length, a UTF-8 JSON
/// header (config, vocabulary ids in index order, tensor directory with name/shape/offset), then
/// the tensors as little-endian float32 in directory order.
inline constexpr std::string_view kCheckpointMagic = "DSAKT1\n";

struct Checkpoint {
  ModelConfig config;
  Vocabulary vocabulary;
  ParameterSet<float> params;
};

void save_checkpoint(const ParameterSet<float>& params, const ModelConfig& config, const Vocabulary& vocabulary,
                     const std::filesystem::path& path);

/// Throws CheckpointVersionError (bad magic), CheckpointShapeError (directory disagrees with the
/// config), CheckpointTruncatedError (short file) or CheckpointError (unreadable header).
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dsakt
