#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "goalex/env.hpp"
#include "goalex/rng.hpp"

namespace goalex {

// One complete episode: T+1 observations and sidecars, T actions.
struct Episode {
  int64_t id = 0;
  int horizon = 0;
  ObsDims dims;
  int action_dim = 0;
  std::vector<uint8_t> obs;      // (T+1) * obs_size
  std::vector<float> actions;    // T * action_dim
  std::vector<float> sidecars;   // (T+1) * 3

  const uint8_t* obs_at(int t) const { return obs.data() + static_cast<int64_t>(t) * dims.size(); }
  const float* action_at(int t) const { return actions.data() + static_cast<int64_t>(t) * action_dim; }
  Sidecar sidecar_at(int t) const {
    return {sidecars[static_cast<size_t>(t) * 3], sidecars[static_cast<size_t>(t) * 3 + 1],
            sidecars[static_cast<size_t>(t) * 3 + 2]};
  }
};

// View of one stored transition (s_tau, a_tau, s_tau+1).
struct TransitionRef {
  const Episode* episode = nullptr;
  int tau = 0;

  const uint8_t* s() const { return episode->obs_at(tau); }
  const uint8_t* s_next() const { return episode->obs_at(tau + 1); }
  const float* action() const { return episode->action_at(tau); }
  Sidecar sidecar() const { return episode->sidecar_at(tau); }
  Sidecar sidecar_next() const { return episode->sidecar_at(tau + 1); }
};

// Relabeled training tuples ((s,g), a, r, (s',g), d) with r in {-1,0}.
struct RelabeledBatch {
  std::vector<const uint8_t*> s;
  std::vector<const uint8_t*> g;
  std::vector<const uint8_t*> s_next;
  std::vector<const float*> action;
  std::vector<float> reward;
  std::vector<uint8_t> done;
  int size() const { return static_cast<int>(s.size()); }
};

enum class GoalStrategy { MaxNovelty, Random, MinNovelty };

// Episode-structured ring buffer. Episodes are stored whole; the oldest is
// evicted when the capacity (in episodes) is reached. capacity 0 = unbounded.
class ReplayBuffer {
 public:
  ReplayBuffer(int horizon, ObsDims dims, int action_dim, size_t capacity_episodes = 0);

  void store_episode(Episode e);

  size_t episode_count() const { return episodes_.size(); }
  int64_t transition_count() const {
    return static_cast<int64_t>(episodes_.size()) * horizon_;
  }
  int horizon() const { return horizon_; }
  ObsDims dims() const { return dims_; }
  int action_dim() const { return action_dim_; }

  const Episode& episode(size_t i) const { return episodes_[i]; }
  const Episode* last_episodes(size_t m, size_t index) const;  // index in [0, min(m, count))

  TransitionRef transition(int64_t flat_index) const;

  // Uniform sample of min(size, count) distinct transitions, ascending order.
  std::vector<int64_t> sample_subset(int64_t size, Rng& rng) const;

  // Goal = next-state of the extremal-novelty transition in the subset.
  // novelty must align with subset; ties break toward the lowest index.
  Observation select_goal(const std::vector<int64_t>& subset,
                          const std::vector<float>& novelty, GoalStrategy strategy,
                          Rng& rng) const;

  RelabeledBatch sample_relabeled(int batch_size, double p_self, Rng& rng) const;

 private:
  int horizon_;
  ObsDims dims_;
  int action_dim_;
  size_t capacity_;
  std::deque<Episode> episodes_;
};

}  // namespace goalex
