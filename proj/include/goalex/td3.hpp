#pragma once

#include <optional>

#include "goalex/adam.hpp"
#include "goalex/env.hpp"
#include "goalex/nn.hpp"
#include "goalex/rng.hpp"

namespace goalex {

// Linear ramp of the exploration noise scale, clamped at the end value.
struct NoiseSchedule {
  float start = 1.5f;
  float end = 0.5f;
  int64_t total_steps = 1;

  float scale(int64_t step) const {
    if (step >= total_steps) return end;
    const double f = static_cast<double>(step) / static_cast<double>(total_steps);
    return static_cast<float>(start + (end - start) * f);
  }
};

struct Td3Config {
  float gamma = 0.99f;
  float polyak = 0.005f;
  int policy_delay = 2;
  float smoothing_sigma = 0.2f;
  float smoothing_clip = 0.5f;
  float actor_lr = 1e-4f;
  float critic_lr = 1e-4f;
};

// Training minibatch in encoded (network-ready) form.
struct Td3Batch {
  Tensor states;       // [n, h, w, c] (goal channels already concatenated, if any)
  Tensor next_states;  // [n, h, w, c]
  Tensor actions;      // [n, d]
  std::vector<float> rewards;
  std::vector<uint8_t> dones;
  int size() const { return states.shape.empty() ? 0 : states.dim(0); }
};

// Twin delayed deterministic-policy-gradient bundle: actor, twin critics,
// their target copies, and optimizer states. Goal conditioning happens in
// the input encoding, so the same machinery drives goal-conditioned and
// plain agents.
class PolicyBundle {
 public:
  PolicyBundle(const NetworkSpec& actor_spec, const NetworkSpec& critic_spec, Shape3 input,
               int action_dim, const Td3Config& cfg, Rng& init_rng);

  // a = clip(pi(input) + noise_scale * N(0,1)).
  ActionVec act(const Tensor& encoded_input, float noise_scale, Rng& rng) const;

  // One step on both critics toward the shared twin-min bootstrap target.
  float critic_update(const Td3Batch& batch, Rng& smoothing_rng);

  // Deterministic policy gradient through critic 1; critics stay untouched.
  float actor_update(const Td3Batch& batch);

  // target <- tau*online + (1-tau)*target for all three target networks.
  void polyak_update(float tau);

  // Full TD3 step: critic update always, actor + targets every policy_delay
  // calls. Returns the critic loss.
  float train_step(const Td3Batch& batch, Rng& smoothing_rng);

  int action_dim() const { return action_dim_; }
  const Td3Config& config() const { return cfg_; }
  const Network& actor() const { return actor_; }
  const Network& critic1() const { return critic1_; }
  const Network& critic2() const { return critic2_; }
  Network& mutable_actor() { return actor_; }
  Network& mutable_critic1() { return critic1_; }
  Network& mutable_critic2() { return critic2_; }
  Network& mutable_critic1_target() { return critic1_t_; }
  Network& mutable_critic2_target() { return critic2_t_; }
  uint64_t critic_hash() const { return critic1_.param_hash() ^ critic2_.param_hash(); }
  int64_t update_count() const { return update_count_; }

  // Bootstrap targets for a batch, exposed for oracle tests.
  std::vector<float> bootstrap_targets(const Td3Batch& batch, Rng& smoothing_rng) const;

 private:
  Td3Config cfg_;
  int action_dim_;
  Network actor_, critic1_, critic2_;
  Network actor_t_, critic1_t_, critic2_t_;
  AdamState opt_actor_, opt_c1_, opt_c2_;
  int64_t update_count_ = 0;
};

}  // namespace goalex
