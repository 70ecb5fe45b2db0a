#include "goalex/replay.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "goalex/tensor.hpp"

namespace goalex {

namespace {

bool obs_equal(const uint8_t* a, const uint8_t* b, int64_t n) {
  return a == b || std::memcmp(a, b, static_cast<size_t>(n)) == 0;
}

}  // namespace

ReplayBuffer::ReplayBuffer(int horizon, ObsDims dims, int action_dim, size_t capacity_episodes)
    : horizon_(horizon), dims_(dims), action_dim_(action_dim), capacity_(capacity_episodes) {
  if (horizon_ < 1) throw ConfigError("replay horizon must be >= 1");
}

void ReplayBuffer::store_episode(Episode e) {
  const auto T = static_cast<int64_t>(horizon_);
  if (e.horizon != horizon_ ||
      static_cast<int64_t>(e.obs.size()) != (T + 1) * dims_.size() ||
      static_cast<int64_t>(e.actions.size()) != T * action_dim_ ||
      static_cast<int64_t>(e.sidecars.size()) != (T + 1) * 3 || !(e.dims == dims_)) {
    throw ConfigError("store_episode: episode does not match buffer layout");
  }
  episodes_.push_back(std::move(e));
  if (capacity_ > 0 && episodes_.size() > capacity_) episodes_.pop_front();
}

const Episode* ReplayBuffer::last_episodes(size_t m, size_t index) const {
  const size_t n = std::min(m, episodes_.size());
  if (index >= n) return nullptr;
  return &episodes_[episodes_.size() - n + index];
}

TransitionRef ReplayBuffer::transition(int64_t flat_index) const {
  const auto ep = static_cast<size_t>(flat_index / horizon_);
  const int tau = static_cast<int>(flat_index % horizon_);
  return TransitionRef{&episodes_[ep], tau};
}

std::vector<int64_t> ReplayBuffer::sample_subset(int64_t size, Rng& rng) const {
  if (episodes_.empty()) {
    throw std::runtime_error("sample_subset: replay buffer is empty");
  }
  return rng.sample_without_replacement(transition_count(), size);
}

Observation ReplayBuffer::select_goal(const std::vector<int64_t>& subset,
                                      const std::vector<float>& novelty,
                                      GoalStrategy strategy, Rng& rng) const {
  if (subset.empty()) throw std::runtime_error("select_goal: empty subset");
  size_t pick = 0;
  if (strategy == GoalStrategy::Random) {
    pick = static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(subset.size())));
  } else {
    if (novelty.size() != subset.size()) {
      throw ConfigError("select_goal: novelty scores do not align with subset");
    }
    float best = novelty[0];
    for (size_t i = 1; i < subset.size(); ++i) {
      const bool better =
          strategy == GoalStrategy::MaxNovelty ? novelty[i] > best : novelty[i] < best;
      if (better) {
        best = novelty[i];
        pick = i;
      }
    }
  }
  const TransitionRef tr = transition(subset[pick]);
  Observation goal;
  goal.dims = dims_;
  goal.data.assign(tr.s_next(), tr.s_next() + dims_.size());
  return goal;
}

RelabeledBatch ReplayBuffer::sample_relabeled(int batch_size, double p_self, Rng& rng) const {
  if (episodes_.empty()) {
    throw std::runtime_error("sample_relabeled: replay buffer is empty");
  }
  RelabeledBatch b;
  b.s.reserve(static_cast<size_t>(batch_size));
  const int64_t total = transition_count();
  const int64_t obs_len = dims_.size();
  for (int i = 0; i < batch_size; ++i) {
    const TransitionRef tr = transition(rng.uniform_int(total));
    const uint8_t* g;
    if (rng.bernoulli(p_self)) {
      g = tr.s();
    } else {
      // Uniform over the strictly-future states s_{tau+1..T}.
      const int k = tr.tau + 1 + static_cast<int>(rng.uniform_int(horizon_ - tr.tau));
      g = tr.episode->obs_at(k);
    }
    const bool at_goal = obs_equal(g, tr.s(), obs_len);
    const bool reaches_goal = obs_equal(g, tr.s_next(), obs_len);
    b.s.push_back(tr.s());
    b.g.push_back(g);
    b.s_next.push_back(tr.s_next());
    b.action.push_back(tr.action());
    b.reward.push_back(at_goal ? 0.0f : -1.0f);
    b.done.push_back((at_goal || reaches_goal) ? 1 : 0);
  }
  return b;
}

}  // namespace goalex
