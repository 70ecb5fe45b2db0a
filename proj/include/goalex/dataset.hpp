#pragma once

#include <stdexcept>
#include <string>

#include "goalex/replay.hpp"

namespace goalex {

enum class DatasetErrorCode {
  NotADataset,      // bad magic bytes
  VersionMismatch,  // unsupported format version
  Truncated,        // file ends before the header-predicted size
  SizeMismatch,     // header and payload sizes disagree
  Io,               // filesystem failure
};

class DatasetError : public std::runtime_error {
 public:
  DatasetError(DatasetErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  DatasetErrorCode code() const { return code_; }

 private:
  DatasetErrorCode code_;
};

// A replay buffer plus the environment it came from.
struct Dataset {
  std::string env_id;
  ReplayBuffer buffer;
};

inline constexpr uint32_t kDatasetVersion = 1;

// Binary container with a human-readable sidecar manifest at <path>.meta.
// Round-trips bit-exactly.
void export_dataset(const ReplayBuffer& buffer, const std::string& env_id,
                    const std::string& path);
Dataset import_dataset(const std::string& path);

// Header-predicted file size for a buffer of this geometry.
int64_t dataset_file_size(ObsDims dims, int action_dim, int horizon, int64_t episodes);

bool buffers_equal(const ReplayBuffer& a, const ReplayBuffer& b);

}  // namespace goalex
