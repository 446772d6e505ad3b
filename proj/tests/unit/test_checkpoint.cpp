#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "dsakt/checkpoint.hpp"
#include "dsakt/error.hpp"
#include "fixtures.hpp"

using namespace dsakt;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("dsakt_ckpt_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Vocabulary vocab(int e) {
  std::vector<std::string> ids;
  for (int i = 1; i <= e; ++i) ids.push_back("ex" + std::to_string(i));
  return Vocabulary(ids);
}

}  // namespace

TEST_CASE("checkpoint round trip") {
  TempDir dir;
  ModelConfig c;
  c.e = 6;
  c.k = 5;
  c.d = 8;
  c.h = 2;
  c.n_blocks = 2;
  const auto params = init_params<float>(c, 9);
  const auto v = vocab(6);
  const auto a = dir.path / "a.bin", b = dir.path / "b.bin";
  save_checkpoint(params, c, v, a);

  const auto loaded = load_checkpoint(a);
  CHECK(loaded.vocabulary == v);
  CHECK(loaded.config.e == 6);
  CHECK(loaded.config.n_blocks == 2);
  CHECK(loaded.config.ffn_width() == 8);
  CHECK(slurp(a).starts_with(kCheckpointMagic));

  save_checkpoint(loaded.params, loaded.config, loaded.vocabulary, b);
  CHECK(slurp(a) == slurp(b));

  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto w = testing::random_window(6, 5, rng, 3 + trial % 3);
    const auto before = forward(w, params, c).probabilities;
    const auto after = forward(w, loaded.params, loaded.config).probabilities;
    CHECK(before == after);
  }
}

TEST_CASE("damaged checkpoints") {
  TempDir dir;
  ModelConfig c;
  c.e = 4;
  c.k = 3;
  c.d = 4;
  const auto good = dir.path / "good.bin";
  save_checkpoint(init_params<float>(c, 1), c, vocab(4), good);
  const std::string bytes = slurp(good);
  const auto bad = dir.path / "bad.bin";

  SUBCASE("magic") {
    std::string copy = bytes;
    copy[5] = '2';
    spit(bad, copy);
    CHECK_THROWS_AS(load_checkpoint(bad), CheckpointVersionError);
    spit(bad, "hello");
    CHECK_THROWS_AS(load_checkpoint(bad), CheckpointVersionError);
  }
  SUBCASE("truncated") {
    spit(bad, bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(load_checkpoint(bad), CheckpointTruncatedError);
    spit(bad, bytes.substr(0, 10));
    CHECK_THROWS_AS(load_checkpoint(bad), CheckpointTruncatedError);
  }
  SUBCASE("trailing bytes") {
    spit(bad, bytes + "xxxx");
    CHECK_THROWS_AS(load_checkpoint(bad), CheckpointShapeError);
  }
  SUBCASE("shape disagreement") {
    // same header length, different width: the directory no longer matches the config
    std::string copy = bytes;
    const auto at = copy.find("\"d\":4");
    REQUIRE(at != std::string::npos);
    copy[at + 4] = '6';
    spit(bad, copy);
    CHECK_THROWS_AS(load_checkpoint(bad), CheckpointShapeError);
  }
  SUBCASE("garbled header") {
    std::string copy = bytes;
    copy[7 + 8] = '#';
    spit(bad, copy);
    CHECK_THROWS_AS(load_checkpoint(bad), CheckpointError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_checkpoint(dir.path / "nope.bin"), IoError); }
  CHECK_THROWS_AS(save_checkpoint(init_params<float>(c, 1), c, vocab(5), dir.path / "x.bin"), ConfigError);
}
