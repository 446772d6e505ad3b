#include "dsakt/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include <json.hpp>

#include "dsakt/error.hpp"

namespace dsakt {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

json config_to_json(const ModelConfig& c) {
  return json{{"e", c.e},
              {"k", c.k},
              {"d", c.d},
              {"h", c.h},
              {"d_ff", c.ffn_width()},
              {"n_blocks", c.n_blocks},
              {"dropout", c.dropout},
              {"scale_full_d", c.scale_full_d}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.e = j.at("e").get<int>();
  c.k = j.at("k").get<int>();
  c.d = j.at("d").get<int>();
  c.h = j.at("h").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.n_blocks = j.at("n_blocks").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.scale_full_d = j.at("scale_full_d").get<bool>();
  return c;
}

}  // namespace

void save_checkpoint(const ParameterSet<float>& params, const ModelConfig& config, const Vocabulary& vocabulary,
                     const std::filesystem::path& path) {
  if (vocabulary.size() != config.e)
    throw ConfigError("checkpoint: vocabulary has " + std::to_string(vocabulary.size()) + " ids but e = " +
                      std::to_string(config.e));
  json directory = json::array();
  std::uint64_t offset = 0;
  for_each_tensor(params, [&](const std::string& name, const Matrix<float>& m) {
    directory.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(m.size()) * sizeof(float);
  });
  const json header{{"config", config_to_json(config)}, {"vocabulary", vocabulary.ids()}, {"tensors", directory}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out.write(kCheckpointMagic.data(), static_cast<std::streamsize>(kCheckpointMagic.size()));
  const std::uint64_t length = text.size();
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for_each_tensor(params, [&](const std::string&, const Matrix<float>& m) {
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
  });
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const std::size_t magic_size = kCheckpointMagic.size();
  if (bytes.size() < magic_size || std::memcmp(bytes.data(), kCheckpointMagic.data(), magic_size) != 0)
    throw CheckpointVersionError("not a DSAKT1 checkpoint (bad magic/version): " + path.string());
  std::size_t pos = magic_size;
  std::uint64_t length = 0;
  if (bytes.size() < pos + sizeof(length)) throw CheckpointTruncatedError("checkpoint truncated in header length");
  std::memcpy(&length, bytes.data() + pos, sizeof(length));
  pos += sizeof(length);
  if (bytes.size() - pos < length) throw CheckpointTruncatedError("checkpoint truncated in header");

  json header;
  Checkpoint ckpt;
  try {
    header = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + length));
    ckpt.config = config_from_json(header.at("config"));
    ckpt.vocabulary = Vocabulary(header.at("vocabulary").get<std::vector<std::string>>());
  } catch (const json::exception& ex) {
    throw CheckpointError(std::string("unreadable checkpoint header: ") + ex.what());
  }
  pos += length;

  try {
    ckpt.params = ParameterSet<float>::zeros(ckpt.config);
  } catch (const ConfigError& ex) {
    throw CheckpointShapeError(std::string("checkpoint config invalid: ") + ex.what());
  }
  if (ckpt.vocabulary.size() != ckpt.config.e)
    throw CheckpointShapeError("checkpoint vocabulary size disagrees with e");

  const json directory = header.contains("tensors") ? header["tensors"] : json::array();
  if (!directory.is_array()) throw CheckpointError("checkpoint tensor directory is not an array");
  std::size_t index = 0;
  std::uint64_t expected_offset = 0;
  const std::size_t data_start = pos;
  try {
    for_each_tensor(ckpt.params, [&](const std::string& name, Matrix<float>& m) {
      if (index >= directory.size()) throw CheckpointShapeError("checkpoint directory is missing '" + name + "'");
      const json& entry = directory[index++];
      const auto shape = entry.at("shape").get<std::vector<std::int64_t>>();
      if (entry.at("name").get<std::string>() != name || shape.size() != 2 || shape[0] != m.rows() ||
          shape[1] != m.cols())
        throw CheckpointShapeError("checkpoint tensor '" + entry.at("name").get<std::string>() + "' does not match '" +
                                   name + "' " + shape_string(m.rows(), m.cols()));
      if (entry.at("offset").get<std::uint64_t>() != expected_offset)
        throw CheckpointShapeError("checkpoint tensor '" + name + "' has an unexpected offset");
      const std::size_t nbytes = static_cast<std::size_t>(m.size()) * sizeof(float);
      if (bytes.size() < data_start + expected_offset + nbytes)
        throw CheckpointTruncatedError("checkpoint truncated in tensor '" + name + "'");
      std::memcpy(m.data(), bytes.data() + data_start + expected_offset, nbytes);
      expected_offset += nbytes;
    });
  } catch (const json::exception& ex) {
    throw CheckpointError(std::string("malformed checkpoint directory: ") + ex.what());
  }
  if (index != directory.size()) throw CheckpointShapeError("checkpoint directory has extra tensors");
  if (bytes.size() != data_start + expected_offset)
    throw CheckpointShapeError("checkpoint has trailing bytes after the last tensor");
  return ckpt;
}

}  // namespace dsakt
