#include "goalex/coverage.hpp"

namespace goalex {

void CoverageStats::update(const Env& env, const Episode& episode) {
  std::vector<int64_t> ids;
  ids.reserve(static_cast<size_t>(episode.horizon) + 1);
  for (int t = 0; t <= episode.horizon; ++t) {
    ids.push_back(env.state_id(episode.sidecar_at(t)));
  }
  update_ids(ids);
}

void CoverageStats::update_ids(const std::vector<int64_t>& episode_state_ids) {
  std::unordered_set<int64_t> in_episode;
  int novel = 0;
  for (int64_t id : episode_state_ids) {
    in_episode.insert(id);
    if (seen.insert(id).second) ++novel;
  }
  per_episode_unique.push_back(static_cast<int>(in_episode.size()));
  per_episode_novel.push_back(novel);
  total_unique += novel;
}

}  // namespace goalex
