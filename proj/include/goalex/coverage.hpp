#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "goalex/env.hpp"
#include "goalex/replay.hpp"

namespace goalex {

// Running count of distinct discrete simulator states, accounted from the
// ground-truth sidecars (never from pixels).
struct CoverageStats {
  int64_t total_unique = 0;
  std::vector<int> per_episode_unique;
  std::vector<int> per_episode_novel;
  std::unordered_set<int64_t> seen;

  // Consumes the T+1 sidecar states of one episode.
  void update(const Env& env, const Episode& episode);
  void update_ids(const std::vector<int64_t>& episode_state_ids);
};

}  // namespace goalex
