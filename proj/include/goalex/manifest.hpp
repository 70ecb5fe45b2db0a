#pragma once

#include <string>
#include <vector>

#include "goalex/config.hpp"

namespace goalex {

inline constexpr const char* kGoalexVersion = "0.1.0";

// Self-describing run record: written with status=running before the run
// starts, rewritten with the outcome at the end. Together with the config
// echo it suffices to reproduce the run.
struct RunManifest {
  std::string status = "running";
  std::string env;
  std::string method;
  uint64_t seed = 0;
  std::string code_version = kGoalexVersion;
  std::string started_at;
  std::string finished_at;
  double wall_seconds = 0.0;
  std::vector<std::string> artifacts;
  Config config_echo;

  void write(const std::string& path) const;
  static RunManifest read(const std::string& path);
};

std::string timestamp_utc();

}  // namespace goalex
