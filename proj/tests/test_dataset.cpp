#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "goalex/checkpoint.hpp"
#include "goalex/dataset.hpp"
#include "goalex/rng.hpp"

using namespace goalex;
namespace fs = std::filesystem;

namespace {

constexpr ObsDims kDims{4, 4, 3};

ReplayBuffer random_buffer(int episodes, int horizon, uint64_t seed) {
  ReplayBuffer buf(horizon, kDims, 2);
  Rng rng(seed);
  for (int e = 0; e < episodes; ++e) {
    Episode ep;
    ep.id = e;
    ep.horizon = horizon;
    ep.dims = kDims;
    ep.action_dim = 2;
    for (int t = 0; t <= horizon; ++t) {
      for (int64_t i = 0; i < kDims.size(); ++i) {
        ep.obs.push_back(static_cast<uint8_t>(rng.uniform_int(256)));
      }
      for (int i = 0; i < 3; ++i) ep.sidecars.push_back(rng.uniform_float(0.0f, 11.0f));
    }
    for (int t = 0; t < horizon * 2; ++t) ep.actions.push_back(rng.uniform_float(-1, 1));
    buf.store_episode(std::move(ep));
  }
  return buf;
}

std::string temp_path(const char* name) {
  return (fs::temp_directory_path() / name).string();
}

std::vector<char> read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream f(path, std::ios::binary);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("export/import round-trips bit-exactly") {
  const ReplayBuffer buf = random_buffer(5, 6, 1);
  const std::string path = temp_path("gx_roundtrip.bin");
  export_dataset(buf, "cube", path);
  const Dataset back = import_dataset(path);
  CHECK(back.env_id == "cube");
  CHECK(buffers_equal(buf, back.buffer));
  CHECK(fs::exists(path + ".meta"));

  // Re-exporting the imported buffer reproduces the same bytes.
  const std::string path2 = temp_path("gx_roundtrip2.bin");
  export_dataset(back.buffer, back.env_id, path2);
  CHECK(read_bytes(path) == read_bytes(path2));
}

TEST_CASE("file size matches the header-predicted size formula") {
  for (int episodes : {1, 3, 8}) {
    const ReplayBuffer buf = random_buffer(episodes, 4, 7);
    const std::string path = temp_path("gx_size.bin");
    export_dataset(buf, "grid", path);
    CHECK(static_cast<int64_t>(fs::file_size(path)) ==
          dataset_file_size(kDims, 2, 4, episodes));
  }
}

TEST_CASE("corrupt magic bytes produce the not-a-dataset error") {
  const std::string path = temp_path("gx_magic.bin");
  export_dataset(random_buffer(2, 3, 2), "grid", path);
  auto bytes = read_bytes(path);
  bytes[0] = 'X';
  write_bytes(path, bytes);
  try {
    import_dataset(path);
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(e.code() == DatasetErrorCode::NotADataset);
  }
}

TEST_CASE("unsupported version produces the version-mismatch error") {
  const std::string path = temp_path("gx_version.bin");
  export_dataset(random_buffer(2, 3, 3), "grid", path);
  auto bytes = read_bytes(path);
  bytes[4] = 99;  // version field follows the 4 magic bytes
  write_bytes(path, bytes);
  try {
    import_dataset(path);
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(e.code() == DatasetErrorCode::VersionMismatch);
  }
}

TEST_CASE("truncated files produce the truncation error") {
  const std::string path = temp_path("gx_trunc.bin");
  export_dataset(random_buffer(2, 3, 4), "grid", path);
  auto bytes = read_bytes(path);
  bytes.resize(bytes.size() - 17);
  write_bytes(path, bytes);
  try {
    import_dataset(path);
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(e.code() == DatasetErrorCode::Truncated);
  }
  // Even a file shorter than the header is reported as truncated.
  bytes.resize(10);
  write_bytes(path, bytes);
  try {
    import_dataset(path);
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(e.code() == DatasetErrorCode::Truncated);
  }
}

TEST_CASE("trailing bytes produce the size-mismatch error") {
  const std::string path = temp_path("gx_trailing.bin");
  export_dataset(random_buffer(2, 3, 5), "grid", path);
  auto bytes = read_bytes(path);
  bytes.push_back(0);
  write_bytes(path, bytes);
  try {
    import_dataset(path);
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(e.code() == DatasetErrorCode::SizeMismatch);
  }
}

TEST_CASE("two exports of the same buffer are byte-identical") {
  const ReplayBuffer buf = random_buffer(4, 5, 6);
  const std::string a = temp_path("gx_det_a.bin");
  const std::string b = temp_path("gx_det_b.bin");
  export_dataset(buf, "cube", a);
  export_dataset(buf, "cube", b);
  CHECK(read_bytes(a) == read_bytes(b));
}

TEST_CASE("checkpoints round-trip named tensors") {
  Rng rng(9);
  Network net(NetworkSpec::parse("conv:3:3:1:relu,dense:5:tanh,dense:2:none"),
              Shape3{5, 5, 1}, 0, rng);
  const std::string path = temp_path("gx_ckpt.bin");
  save_checkpoint(path, named_params("actor", net));

  Rng rng2(10);
  Network other(net.spec(), Shape3{5, 5, 1}, 0, rng2);
  CHECK(other.param_hash() != net.param_hash());
  load_params(other, "actor", load_checkpoint(path));
  CHECK(other.param_hash() == net.param_hash());

  // Wrong prefix is reported, as is a bad magic.
  CHECK_THROWS_AS(load_params(other, "critic", load_checkpoint(path)), ConfigError);
  write_bytes(path, {'n', 'o', 'p', 'e'});
  CHECK_THROWS_AS(load_checkpoint(path), DatasetError);
}
