#include "goalex/td3.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace goalex {

PolicyBundle::PolicyBundle(const NetworkSpec& actor_spec, const NetworkSpec& critic_spec,
                           Shape3 input, int action_dim, const Td3Config& cfg, Rng& init_rng)
    : cfg_(cfg),
      action_dim_(action_dim),
      actor_(actor_spec, input, 0, init_rng),
      critic1_(critic_spec, input, action_dim, init_rng),
      critic2_(critic_spec, input, action_dim, init_rng),
      actor_t_(actor_spec, input, 0, init_rng),
      critic1_t_(critic_spec, input, action_dim, init_rng),
      critic2_t_(critic_spec, input, action_dim, init_rng),
      opt_actor_(AdamState::like(std::as_const(actor_).params(), cfg.actor_lr)),
      opt_c1_(AdamState::like(std::as_const(critic1_).params(), cfg.critic_lr)),
      opt_c2_(AdamState::like(std::as_const(critic2_).params(), cfg.critic_lr)) {
  if (actor_.out_dim() != action_dim_) {
    throw ConfigError("actor output dim does not match the action dim");
  }
  if (critic1_.out_dim() != 1) throw ConfigError("critic must output a single value");
  actor_t_.copy_params_from(actor_);
  critic1_t_.copy_params_from(critic1_);
  critic2_t_.copy_params_from(critic2_);
}

ActionVec PolicyBundle::act(const Tensor& encoded_input, float noise_scale, Rng& rng) const {
  const Tensor out = actor_.forward(encoded_input);
  ActionVec a(static_cast<size_t>(action_dim_));
  for (int i = 0; i < action_dim_; ++i) {
    float v = out.data[static_cast<size_t>(i)];
    if (noise_scale > 0.0f) v += noise_scale * rng.normal();
    a[static_cast<size_t>(i)] = std::clamp(v, -1.0f, 1.0f);
  }
  return a;
}

std::vector<float> PolicyBundle::bootstrap_targets(const Td3Batch& batch,
                                                   Rng& smoothing_rng) const {
  const int n = batch.size();
  Tensor next_action = actor_t_.forward(batch.next_states);
  for (int i = 0; i < n * action_dim_; ++i) {
    const float eps = std::clamp(cfg_.smoothing_sigma * smoothing_rng.normal(),
                                 -cfg_.smoothing_clip, cfg_.smoothing_clip);
    next_action.data[static_cast<size_t>(i)] =
        std::clamp(next_action.data[static_cast<size_t>(i)] + eps, -1.0f, 1.0f);
  }
  const Tensor q1 = critic1_t_.forward(batch.next_states, &next_action);
  const Tensor q2 = critic2_t_.forward(batch.next_states, &next_action);
  std::vector<float> y(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const float qmin = std::min(q1.data[static_cast<size_t>(i)], q2.data[static_cast<size_t>(i)]);
    const float mask = batch.dones[static_cast<size_t>(i)] ? 0.0f : 1.0f;
    y[static_cast<size_t>(i)] = batch.rewards[static_cast<size_t>(i)] + cfg_.gamma * mask * qmin;
  }
  return y;
}

float PolicyBundle::critic_update(const Td3Batch& batch, Rng& smoothing_rng) {
  const int n = batch.size();
  if (n == 0) throw ConfigError("critic_update: empty batch");
  const std::vector<float> y = bootstrap_targets(batch, smoothing_rng);
  Tensor target({n, 1});
  for (int i = 0; i < n; ++i) target.data[static_cast<size_t>(i)] = y[static_cast<size_t>(i)];

  float total_loss = 0.0f;
  for (Network* critic : {&critic1_, &critic2_}) {
    Network::Trace trace;
    const Tensor q = critic->forward(batch.states, &batch.actions, &trace);
    MseResult mse = mse_loss(q, target);
    total_loss += mse.loss;
    auto grads = critic->backward(trace, mse.grad);
    AdamState& opt = (critic == &critic1_) ? opt_c1_ : opt_c2_;
    adam_step(critic->params(), Network::grad_ptrs(grads), opt);
  }
  return total_loss / 2.0f;
}

float PolicyBundle::actor_update(const Td3Batch& batch) {
  const int n = batch.size();
  if (n == 0) throw ConfigError("actor_update: empty batch");
  Network::Trace actor_trace;
  const Tensor a = actor_.forward(batch.states, nullptr, &actor_trace);
  Network::Trace critic_trace;
  const Tensor q = critic1_.forward(batch.states, &a, &critic_trace);

  double mean_q = 0.0;
  for (int i = 0; i < n; ++i) mean_q += q.data[static_cast<size_t>(i)];
  const float loss = static_cast<float>(-mean_q / n);

  // d(-mean q)/dq = -1/n; only the action-input gradient is kept.
  Tensor upstream({n, 1}, -1.0f / static_cast<float>(n));
  auto critic_grads = critic1_.backward(critic_trace, upstream);
  auto actor_grads = actor_.backward(actor_trace, critic_grads.aux);
  adam_step(actor_.params(), Network::grad_ptrs(actor_grads), opt_actor_);
  return loss;
}

void PolicyBundle::polyak_update(float tau) {
  if (!(tau > 0.0f && tau <= 1.0f)) throw ConfigError("polyak tau must be in (0,1]");
  const std::pair<Network*, Network*> pairs[] = {
      {&actor_, &actor_t_}, {&critic1_, &critic1_t_}, {&critic2_, &critic2_t_}};
  for (auto [online, target] : pairs) {
    auto op = std::as_const(*online).params();
    auto tp = target->params();
    for (size_t i = 0; i < op.size(); ++i) {
      const float* o = op[i]->ptr();
      float* t = tp[i]->ptr();
      const int64_t n = op[i]->numel();
      // Incremental form: exact fixed point when online == target.
      for (int64_t j = 0; j < n; ++j) t[j] += tau * (o[j] - t[j]);
    }
  }
}

float PolicyBundle::train_step(const Td3Batch& batch, Rng& smoothing_rng) {
  const float loss = critic_update(batch, smoothing_rng);
  ++update_count_;
  if (update_count_ % cfg_.policy_delay == 0) {
    actor_update(batch);
    polyak_update(cfg_.polyak);
  }
  return loss;
}

}  // namespace goalex
