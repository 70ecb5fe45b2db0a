#include "goalex/dataset.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

namespace goalex {

namespace {

constexpr char kMagic[4] = {'G', 'X', 'D', 'S'};
constexpr size_t kEnvIdLen = 8;

struct Header {
  char magic[4];
  uint32_t version;
  char env_id[kEnvIdLen];
  uint32_t h, w, c;
  uint32_t action_dim;
  uint32_t sidecar_dim;
  uint32_t horizon;
  uint32_t episodes;
  uint32_t compression;  // reserved, always 0
  uint64_t first_episode_id;
};
static_assert(sizeof(Header) == 56);

template <typename T>
void write_raw(std::ofstream& f, const T* p, size_t count) {
  f.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(sizeof(T) * count));
}

template <typename T>
void read_raw(std::ifstream& f, T* p, size_t count) {
  f.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(sizeof(T) * count));
  if (!f) throw DatasetError(DatasetErrorCode::Truncated, "dataset file ends prematurely");
}

}  // namespace

int64_t dataset_file_size(ObsDims dims, int action_dim, int horizon, int64_t episodes) {
  const int64_t per_episode =
      (horizon + 1) * dims.size() +                          // observations
      (horizon + 1) * 3 * static_cast<int64_t>(sizeof(float)) +  // sidecars
      horizon * (action_dim * static_cast<int64_t>(sizeof(float)) + 4);  // records
  return static_cast<int64_t>(sizeof(Header)) + episodes * per_episode;
}

void export_dataset(const ReplayBuffer& buffer, const std::string& env_id,
                    const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DatasetError(DatasetErrorCode::Io, "cannot write " + path);

  const ObsDims dims = buffer.dims();
  Header hd{};
  std::memcpy(hd.magic, kMagic, 4);
  hd.version = kDatasetVersion;
  std::memset(hd.env_id, 0, kEnvIdLen);
  std::memcpy(hd.env_id, env_id.data(), std::min(env_id.size(), kEnvIdLen - 1));
  hd.h = static_cast<uint32_t>(dims.h);
  hd.w = static_cast<uint32_t>(dims.w);
  hd.c = static_cast<uint32_t>(dims.c);
  hd.action_dim = static_cast<uint32_t>(buffer.action_dim());
  hd.sidecar_dim = 3;
  hd.horizon = static_cast<uint32_t>(buffer.horizon());
  hd.episodes = static_cast<uint32_t>(buffer.episode_count());
  hd.compression = 0;
  hd.first_episode_id =
      buffer.episode_count() ? static_cast<uint64_t>(buffer.episode(0).id) : 0;
  write_raw(f, &hd, 1);

  const int T = buffer.horizon();
  for (size_t e = 0; e < buffer.episode_count(); ++e) {
    const Episode& ep = buffer.episode(e);
    write_raw(f, ep.obs.data(), ep.obs.size());
    write_raw(f, ep.sidecars.data(), ep.sidecars.size());
    for (int t = 0; t < T; ++t) {
      write_raw(f, ep.action_at(t), static_cast<size_t>(buffer.action_dim()));
      const uint32_t next_ref = static_cast<uint32_t>(e) * (T + 1) + t + 1;
      write_raw(f, &next_ref, 1);
    }
  }
  f.flush();
  if (!f) throw DatasetError(DatasetErrorCode::Io, "write failed for " + path);

  std::ofstream meta(path + ".meta");
  if (!meta) throw DatasetError(DatasetErrorCode::Io, "cannot write " + path + ".meta");
  meta << "format = goalex-dataset\n"
       << "format_version = " << kDatasetVersion << "\n"
       << "env = " << env_id << "\n"
       << "image_h = " << dims.h << "\n"
       << "image_w = " << dims.w << "\n"
       << "image_c = " << dims.c << "\n"
       << "action_dim = " << buffer.action_dim() << "\n"
       << "sidecar_dim = 3\n"
       << "sidecar_fields = " << (env_id == "cube" ? "cx,cy,orient" : "x,y,rot") << "\n"
       << "horizon = " << T << "\n"
       << "episodes = " << buffer.episode_count() << "\n"
       << "transitions = " << buffer.transition_count() << "\n";
}

Dataset import_dataset(const std::string& path) {
  std::error_code ec;
  const auto actual_size = std::filesystem::file_size(path, ec);
  if (ec) throw DatasetError(DatasetErrorCode::Io, "cannot stat " + path);
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DatasetError(DatasetErrorCode::Io, "cannot open " + path);
  if (actual_size < sizeof(Header)) {
    throw DatasetError(DatasetErrorCode::Truncated, path + " is smaller than the header");
  }

  Header hd{};
  read_raw(f, &hd, 1);
  if (std::memcmp(hd.magic, kMagic, 4) != 0) {
    throw DatasetError(DatasetErrorCode::NotADataset, path + " is not a dataset file");
  }
  if (hd.version != kDatasetVersion) {
    throw DatasetError(DatasetErrorCode::VersionMismatch,
                       path + " has unsupported format version " + std::to_string(hd.version));
  }
  if (hd.sidecar_dim != 3 || hd.horizon == 0 || hd.h == 0 || hd.w == 0 || hd.c == 0) {
    throw DatasetError(DatasetErrorCode::SizeMismatch, path + " header fields are invalid");
  }
  const ObsDims dims{static_cast<int>(hd.h), static_cast<int>(hd.w), static_cast<int>(hd.c)};
  const int T = static_cast<int>(hd.horizon);
  const int d = static_cast<int>(hd.action_dim);
  const int64_t expected = dataset_file_size(dims, d, T, hd.episodes);
  if (static_cast<int64_t>(actual_size) < expected) {
    throw DatasetError(DatasetErrorCode::Truncated,
                       path + " is truncated: expected " + std::to_string(expected) +
                           " bytes, found " + std::to_string(actual_size));
  }
  if (static_cast<int64_t>(actual_size) > expected) {
    throw DatasetError(DatasetErrorCode::SizeMismatch,
                       path + " header and payload sizes disagree");
  }

  std::string env_id(hd.env_id, strnlen(hd.env_id, kEnvIdLen));
  Dataset ds{env_id, ReplayBuffer(T, dims, d, 0)};
  for (uint32_t e = 0; e < hd.episodes; ++e) {
    Episode ep;
    ep.id = static_cast<int64_t>(hd.first_episode_id) + e;
    ep.horizon = T;
    ep.dims = dims;
    ep.action_dim = d;
    ep.obs.resize(static_cast<size_t>(T + 1) * dims.size());
    ep.sidecars.resize(static_cast<size_t>(T + 1) * 3);
    ep.actions.resize(static_cast<size_t>(T) * d);
    read_raw(f, ep.obs.data(), ep.obs.size());
    read_raw(f, ep.sidecars.data(), ep.sidecars.size());
    for (int t = 0; t < T; ++t) {
      read_raw(f, ep.actions.data() + static_cast<int64_t>(t) * d, static_cast<size_t>(d));
      uint32_t next_ref = 0;
      read_raw(f, &next_ref, 1);
      const uint32_t want = e * (T + 1) + t + 1;
      if (next_ref != want) {
        throw DatasetError(DatasetErrorCode::SizeMismatch,
                           path + " has an inconsistent next-observation reference");
      }
    }
    ds.buffer.store_episode(std::move(ep));
  }
  return ds;
}

bool buffers_equal(const ReplayBuffer& a, const ReplayBuffer& b) {
  if (a.episode_count() != b.episode_count() || a.horizon() != b.horizon() ||
      !(a.dims() == b.dims()) || a.action_dim() != b.action_dim()) {
    return false;
  }
  for (size_t e = 0; e < a.episode_count(); ++e) {
    const Episode& x = a.episode(e);
    const Episode& y = b.episode(e);
    if (x.id != y.id || x.obs != y.obs || x.actions != y.actions || x.sidecars != y.sidecars) {
      return false;
    }
  }
  return true;
}

}  // namespace goalex
