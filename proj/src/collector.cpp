#include "goalex/collector.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include "goalex/checkpoint.hpp"
#include "goalex/dataset.hpp"
#include "goalex/env_cube.hpp"
#include "goalex/env_grid.hpp"
#include "goalex/manifest.hpp"
#include "goalex/report.hpp"

namespace goalex {

Method method_from_string(const std::string& s) {
  if (s == "gc-max") return Method::GcMax;
  if (s == "gc-random") return Method::GcRandom;
  if (s == "gc-min") return Method::GcMin;
  if (s == "intrinsic") return Method::Intrinsic;
  if (s == "random") return Method::Random;
  throw ConfigError("unknown method '" + s + "'");
}

std::string method_to_string(Method m) {
  switch (m) {
    case Method::GcMax: return "gc-max";
    case Method::GcRandom: return "gc-random";
    case Method::GcMin: return "gc-min";
    case Method::Intrinsic: return "intrinsic";
    case Method::Random: return "random";
  }
  return "?";
}

void CollectionConfig::validate() const {
  if (env_id != "grid" && env_id != "cube") {
    throw ConfigError("env must be grid or cube, got '" + env_id + "'");
  }
  if (cycles < 1 || episodes_per_cycle < 1 || horizon < 1 || rnd_epochs < 0) {
    throw ConfigError("cycles, episodes_per_cycle and horizon must be >= 1");
  }
  if (p_self < 0.0 || p_self > 1.0) throw ConfigError("p_self must be in [0,1]");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(td3.gamma > 0.0f && td3.gamma <= 1.0f)) throw ConfigError("gamma must be in (0,1]");
}

std::string default_trunk_spec() { return "conv:8:4:2:relu,conv:16:3:2:relu,dense:64:relu"; }

std::string default_actor_spec(int action_dim) {
  return default_trunk_spec() + ",dense:" + std::to_string(action_dim) + ":tanh";
}

std::string default_critic_spec() { return default_trunk_spec() + ",dense:1:none"; }

std::string default_rnd_spec(int embed_dim) {
  return default_trunk_spec() + ",dense:" + std::to_string(embed_dim) + ":none";
}

CollectionConfig collection_config_from(const Config& cfg) {
  CollectionConfig cc;
  cc.env_id = cfg.str("env", cc.env_id);
  cc.method = method_from_string(cfg.str("method", method_to_string(cc.method)));
  cc.seed = static_cast<uint64_t>(cfg.integer("seed", static_cast<int64_t>(cc.seed)));
  cc.cycles = static_cast<int>(cfg.integer("cycles", cc.cycles));
  cc.episodes_per_cycle =
      static_cast<int>(cfg.integer("episodes_per_cycle", cc.episodes_per_cycle));
  // The paper-scale episode lengths differ per domain; default accordingly.
  cc.horizon = static_cast<int>(cfg.integer("horizon", cc.env_id == "cube" ? 200 : 250));
  cc.p_self = cfg.number("p_self", cc.p_self);
  cc.rnd_epochs = static_cast<int>(cfg.integer("rnd_epochs", cc.rnd_epochs));
  cc.rnd_batch = static_cast<int>(cfg.integer("rnd_batch", cc.rnd_batch));
  cc.rnd_lr = static_cast<float>(cfg.number("rnd_lr", cc.rnd_lr));
  cc.rnd_embed = static_cast<int>(cfg.integer("rnd_embed", cc.rnd_embed));
  cc.net_side = static_cast<int>(cfg.integer("net_image_side", cc.net_side));
  cc.batch_size = static_cast<int>(cfg.integer("batch_size", cc.batch_size));
  cc.noise_start = static_cast<float>(cfg.number("noise_start", cc.noise_start));
  cc.noise_end = static_cast<float>(cfg.number("noise_end", cc.noise_end));
  cc.buffer_capacity =
      static_cast<size_t>(cfg.integer("buffer_capacity", static_cast<int64_t>(cc.buffer_capacity)));
  cc.td3.gamma = static_cast<float>(cfg.number("gamma", cc.td3.gamma));
  cc.td3.polyak = static_cast<float>(cfg.number("polyak", cc.td3.polyak));
  cc.td3.policy_delay = static_cast<int>(cfg.integer("policy_delay", cc.td3.policy_delay));
  cc.td3.smoothing_sigma =
      static_cast<float>(cfg.number("smoothing_sigma", cc.td3.smoothing_sigma));
  cc.td3.smoothing_clip =
      static_cast<float>(cfg.number("smoothing_clip", cc.td3.smoothing_clip));
  cc.td3.actor_lr = static_cast<float>(cfg.number("actor_lr", cc.td3.actor_lr));
  cc.td3.critic_lr = static_cast<float>(cfg.number("critic_lr", cc.td3.critic_lr));
  cc.actor_net = cfg.str("actor_net", cc.actor_net);
  cc.critic_net = cfg.str("critic_net", cc.critic_net);
  cc.rnd_net = cfg.str("rnd_net", cc.rnd_net);
  cc.image_side = static_cast<int>(cfg.integer("image_side", cc.image_side));
  cc.cube_cells = static_cast<int>(cfg.integer("cube_cells", cc.cube_cells));
  cc.cube_cell_cm = static_cast<float>(cfg.number("cube_cell_cm", cc.cube_cell_cm));
  cc.cube_reset_cx = static_cast<int>(cfg.integer("cube_reset_cx", cc.cube_reset_cx));
  cc.cube_reset_cy = static_cast<int>(cfg.integer("cube_reset_cy", cc.cube_reset_cy));
  cc.cube_contact = static_cast<float>(cfg.number("cube_contact", cc.cube_contact));
  cc.debug_checks = cfg.boolean("debug_checks", cc.debug_checks);
  cc.validate();
  return cc;
}

Config collection_config_echo(const CollectionConfig& cc) {
  Config out;
  auto set_num = [&out](const char* k, double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    out.set(k, s);
  };
  out.set("env", cc.env_id);
  out.set("method", method_to_string(cc.method));
  out.set("seed", std::to_string(cc.seed));
  out.set("cycles", std::to_string(cc.cycles));
  out.set("episodes_per_cycle", std::to_string(cc.episodes_per_cycle));
  out.set("horizon", std::to_string(cc.horizon));
  set_num("p_self", cc.p_self);
  out.set("rnd_epochs", std::to_string(cc.rnd_epochs));
  out.set("rnd_batch", std::to_string(cc.rnd_batch));
  set_num("rnd_lr", cc.rnd_lr);
  out.set("rnd_embed", std::to_string(cc.rnd_embed));
  out.set("net_image_side", std::to_string(cc.net_side));
  out.set("batch_size", std::to_string(cc.batch_size));
  set_num("noise_start", cc.noise_start);
  set_num("noise_end", cc.noise_end);
  out.set("buffer_capacity", std::to_string(cc.buffer_capacity));
  set_num("gamma", cc.td3.gamma);
  set_num("polyak", cc.td3.polyak);
  out.set("policy_delay", std::to_string(cc.td3.policy_delay));
  set_num("smoothing_sigma", cc.td3.smoothing_sigma);
  set_num("smoothing_clip", cc.td3.smoothing_clip);
  set_num("actor_lr", cc.td3.actor_lr);
  set_num("critic_lr", cc.td3.critic_lr);
  const int action_dim = 3;
  out.set("actor_net", cc.actor_net.empty() ? default_actor_spec(action_dim) : cc.actor_net);
  out.set("critic_net", cc.critic_net.empty() ? default_critic_spec() : cc.critic_net);
  out.set("rnd_net", cc.rnd_net.empty() ? default_rnd_spec(cc.rnd_embed) : cc.rnd_net);
  out.set("image_side", std::to_string(cc.image_side));
  out.set("cube_cells", std::to_string(cc.cube_cells));
  set_num("cube_cell_cm", cc.cube_cell_cm);
  out.set("cube_reset_cx", std::to_string(cc.cube_reset_cx));
  out.set("cube_reset_cy", std::to_string(cc.cube_reset_cy));
  set_num("cube_contact", cc.cube_contact);
  out.set("debug_checks", cc.debug_checks ? "true" : "false");
  return out;
}

std::unique_ptr<Env> make_env(const CollectionConfig& cc) {
  if (cc.env_id == "grid") return std::make_unique<GridEnv>(cc.image_side);
  if (cc.env_id == "cube") {
    CubeParams p;
    p.cells = cc.cube_cells;
    p.cell_cm = cc.cube_cell_cm;
    p.image_side = cc.image_side;
    p.reset_cx = cc.cube_reset_cx;
    p.reset_cy = cc.cube_reset_cy;
    p.contact = cc.cube_contact;
    return std::make_unique<CubeEnv>(p);
  }
  throw ConfigError("unknown env '" + cc.env_id + "'");
}

namespace {

bool is_gc(Method m) {
  return m == Method::GcMax || m == Method::GcRandom || m == Method::GcMin;
}

GoalStrategy strategy_of(Method m) {
  switch (m) {
    case Method::GcMax: return GoalStrategy::MaxNovelty;
    case Method::GcRandom: return GoalStrategy::Random;
    case Method::GcMin: return GoalStrategy::MinNovelty;
    default: throw ConfigError("method has no goal strategy");
  }
}

ActionVec random_action(int d, Rng& rng) {
  ActionVec a(static_cast<size_t>(d));
  for (auto& v : a) v = rng.uniform_float(-1.0f, 1.0f);
  return a;
}

}  // namespace

Td3Batch build_goal_batch(const RelabeledBatch& rb, const ObsEncoder& enc, int action_dim) {
  Td3Batch batch;
  batch.states = enc.encode_pairs(rb.s.data(), rb.g.data(), rb.size());
  batch.next_states = enc.encode_pairs(rb.s_next.data(), rb.g.data(), rb.size());
  batch.actions = Tensor({rb.size(), action_dim});
  for (int i = 0; i < rb.size(); ++i) {
    std::memcpy(batch.actions.ptr() + static_cast<int64_t>(i) * action_dim,
                rb.action[static_cast<size_t>(i)],
                sizeof(float) * static_cast<size_t>(action_dim));
  }
  batch.rewards = rb.reward;
  batch.dones = rb.done;
  return batch;
}

Td3Batch build_intrinsic_batch(const ReplayBuffer& buffer, const RndPair& rnd,
                               const ObsEncoder& enc, int batch_size, Rng& rng) {
  const int d = buffer.action_dim();
  Td3Batch batch;
  std::vector<const uint8_t*> s(static_cast<size_t>(batch_size));
  std::vector<const uint8_t*> sn(static_cast<size_t>(batch_size));
  batch.actions = Tensor({batch_size, d});
  for (int i = 0; i < batch_size; ++i) {
    const TransitionRef tr = buffer.transition(rng.uniform_int(buffer.transition_count()));
    s[static_cast<size_t>(i)] = tr.s();
    sn[static_cast<size_t>(i)] = tr.s_next();
    std::memcpy(batch.actions.ptr() + static_cast<int64_t>(i) * d, tr.action(),
                sizeof(float) * static_cast<size_t>(d));
  }
  batch.states = enc.encode_batch(s.data(), batch_size);
  batch.next_states = enc.encode_batch(sn.data(), batch_size);
  batch.rewards = rnd.batch_novelty(batch.next_states);
  batch.dones.assign(static_cast<size_t>(batch_size), 0);
  return batch;
}

RunResult run_collection(const CollectionConfig& cfg, Env& env) {
  cfg.validate();
  set_debug_checks(cfg.debug_checks);

  const ObsDims dims = env.obs_dims();
  const int d = env.action_dim();
  const int T = cfg.horizon;
  const int M = cfg.episodes_per_cycle;
  const bool gc = is_gc(cfg.method);
  const bool uses_rnd = gc || cfg.method == Method::Intrinsic;
  const bool uses_agent = cfg.method != Method::Random;

  RngPool pool(cfg.seed);
  Rng rng_action_noise = pool.stream("agent-noise");
  Rng rng_smooth = pool.stream("target-smoothing");
  Rng rng_relabel = pool.stream("relabel");
  Rng rng_subset = pool.stream("subset");
  Rng rng_goal = pool.stream("goal-pick");
  Rng rng_rnd = pool.stream("rnd-shuffle");
  Rng rng_uniform = pool.stream("env-random");
  Rng rng_agent_init = pool.stream("agent-init");
  Rng rng_rnd_target = pool.stream("rnd-target-init");
  Rng rng_rnd_pred = pool.stream("rnd-predictor-init");

  ObsEncoder enc(dims, cfg.net_side);
  const Shape3 single = enc.encoded_shape();
  const Shape3 agent_in = gc ? Shape3{single.h, single.w, 2 * single.c} : single;

  std::unique_ptr<PolicyBundle> bundle;
  if (uses_agent) {
    const NetworkSpec actor_spec =
        NetworkSpec::parse(cfg.actor_net.empty() ? default_actor_spec(d) : cfg.actor_net);
    const NetworkSpec critic_spec =
        NetworkSpec::parse(cfg.critic_net.empty() ? default_critic_spec() : cfg.critic_net);
    bundle = std::make_unique<PolicyBundle>(actor_spec, critic_spec, agent_in, d, cfg.td3,
                                            rng_agent_init);
  }
  std::unique_ptr<RndPair> rnd;
  if (uses_rnd) {
    const NetworkSpec rnd_spec =
        NetworkSpec::parse(cfg.rnd_net.empty() ? default_rnd_spec(cfg.rnd_embed) : cfg.rnd_net);
    rnd = std::make_unique<RndPair>(rnd_spec, single, cfg.rnd_lr, rng_rnd_target, rng_rnd_pred);
  }

  RunResult res{env.id(),
                ReplayBuffer(T, dims, d, cfg.buffer_capacity),
                CoverageStats{},
                {},
                nullptr,
                nullptr,
                {}};
  NoiseSchedule schedule{cfg.noise_start, cfg.noise_end, cfg.total_steps()};
  int64_t action_step = 0;
  int64_t episode_counter = 0;

  auto trace = [&](const std::string& ev) {
    if (cfg.record_trace) res.trace.push_back(ev);
  };

  Observation obs, next_obs;
  Sidecar sc, next_sc;
  for (int cycle = 0; cycle < cfg.cycles; ++cycle) {
    trace("cycle:" + std::to_string(cycle));
    for (int e = 0; e < M; ++e) {
      env.reset(obs, sc);

      // Goal selection over a replay subset (Alg. 1 lines 5-6); the very
      // first episode bootstraps from the reset observation.
      Observation goal;
      float goal_nov = std::numeric_limits<float>::quiet_NaN();
      if (gc) {
        if (res.buffer.episode_count() == 0) {
          goal = obs;
        } else {
          const auto subset = res.buffer.sample_subset(
              static_cast<int64_t>(M) * T, rng_subset);
          std::vector<float> scores;
          if (cfg.method != Method::GcRandom) {
            std::vector<const uint8_t*> ptrs(subset.size());
            for (size_t i = 0; i < subset.size(); ++i) {
              ptrs[i] = res.buffer.transition(subset[i]).s_next();
            }
            const Tensor batch = enc.encode_batch(ptrs.data(), static_cast<int>(ptrs.size()));
            scores = rnd->batch_novelty(batch);
            float best = scores[0];
            for (float s : scores) {
              best = cfg.method == Method::GcMax ? std::max(best, s) : std::min(best, s);
            }
            goal_nov = best;
          }
          goal = res.buffer.select_goal(subset, scores, strategy_of(cfg.method), rng_goal);
        }
      }
      trace("goal");
      res.goal_novelty.push_back(goal_nov);

      // Rollout phase: exactly T steps.
      Episode ep;
      ep.id = episode_counter++;
      ep.horizon = T;
      ep.dims = dims;
      ep.action_dim = d;
      ep.obs.reserve(static_cast<size_t>(T + 1) * dims.size());
      ep.sidecars.reserve(static_cast<size_t>(T + 1) * 3);
      ep.actions.reserve(static_cast<size_t>(T) * d);
      ep.obs.insert(ep.obs.end(), obs.data.begin(), obs.data.end());
      ep.sidecars.insert(ep.sidecars.end(), sc.begin(), sc.end());
      for (int t = 0; t < T; ++t) {
        ActionVec a;
        if (!uses_agent) {
          a = random_action(d, rng_uniform);
        } else {
          const uint8_t* sp = obs.data.data();
          Tensor in;
          if (gc) {
            const uint8_t* gp = goal.data.data();
            in = enc.encode_pairs(&sp, &gp, 1);
          } else {
            in = enc.encode_batch(&sp, 1);
          }
          a = bundle->act(in, schedule.scale(action_step), rng_action_noise);
        }
        env.step(a, next_obs, next_sc);
        ep.actions.insert(ep.actions.end(), a.begin(), a.end());
        ep.obs.insert(ep.obs.end(), next_obs.data.begin(), next_obs.data.end());
        ep.sidecars.insert(ep.sidecars.end(), next_sc.begin(), next_sc.end());
        obs = std::move(next_obs);
        sc = next_sc;
        ++action_step;
      }
      trace("rollout:" + std::to_string(T));
      res.coverage.update(env, ep);
      res.buffer.store_episode(std::move(ep));

      // Training phase: T off-policy steps (Alg. 1 lines 12-20).
      if (uses_agent) {
        for (int t = 0; t < T; ++t) {
          const Td3Batch batch =
              gc ? build_goal_batch(
                       res.buffer.sample_relabeled(cfg.batch_size, cfg.p_self, rng_relabel),
                       enc, d)
                 : build_intrinsic_batch(res.buffer, *rnd, enc, cfg.batch_size, rng_relabel);
          bundle->train_step(batch, rng_smooth);
        }
        trace("train:" + std::to_string(T));
      }
    }

    // RND phase: predictor fit on the last M episodes for K epochs.
    if (uses_rnd && cfg.rnd_epochs > 0) {
      const size_t m = std::min<size_t>(static_cast<size_t>(M), res.buffer.episode_count());
      std::vector<const uint8_t*> ptrs;
      ptrs.reserve(m * static_cast<size_t>(T + 1));
      for (size_t i = 0; i < m; ++i) {
        const Episode* recent = res.buffer.last_episodes(m, i);
        for (int t = 0; t <= T; ++t) ptrs.push_back(recent->obs_at(t));
      }
      const Tensor states = enc.encode_batch(ptrs.data(), static_cast<int>(ptrs.size()));
      rnd->train(states, cfg.rnd_epochs, cfg.rnd_batch, rng_rnd);
      trace("rnd_train:" + std::to_string(cfg.rnd_epochs));
    }
  }

  res.bundle = std::move(bundle);
  res.rnd = std::move(rnd);
  return res;
}

RunResult run_collection(const CollectionConfig& cfg) {
  auto env = make_env(cfg);
  return run_collection(cfg, *env);
}

RunResult run_baseline_random(const CollectionConfig& cfg) {
  CollectionConfig c = cfg;
  c.method = Method::Random;
  return run_collection(c);
}

RunResult run_baseline_intrinsic(const CollectionConfig& cfg) {
  CollectionConfig c = cfg;
  c.method = Method::Intrinsic;
  return run_collection(c);
}

RunResult run_and_export(const CollectionConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  RunManifest man;
  man.env = cfg.env_id;
  man.method = method_to_string(cfg.method);
  man.seed = cfg.seed;
  man.started_at = timestamp_utc();
  man.config_echo = collection_config_echo(cfg);
  man.artifacts = {"dataset.bin", "coverage.csv"};
  const std::string man_path = (fs::path(out_dir) / "manifest.txt").string();
  man.write(man_path);

  auto env = make_env(cfg);
  RunResult res = run_collection(cfg, *env);

  export_dataset(res.buffer, res.env_id, (fs::path(out_dir) / "dataset.bin").string());
  write_coverage_csv((fs::path(out_dir) / "coverage.csv").string(), res.coverage);
  emit_report(res.coverage, res.buffer, *env, out_dir);
  if (res.bundle) {
    std::vector<std::pair<std::string, const Tensor*>> tensors;
    for (const auto& [name, t] : named_params("actor", res.bundle->actor())) {
      tensors.emplace_back(name, t);
    }
    for (const auto& [name, t] : named_params("critic1", res.bundle->critic1())) {
      tensors.emplace_back(name, t);
    }
    for (const auto& [name, t] : named_params("critic2", res.bundle->critic2())) {
      tensors.emplace_back(name, t);
    }
    save_checkpoint((fs::path(out_dir) / "policy.ckpt").string(), tensors);
    man.artifacts.push_back("policy.ckpt");
  }
  if (res.rnd) {
    save_checkpoint((fs::path(out_dir) / "rnd.ckpt").string(),
                    named_params("predictor", res.rnd->predictor()));
    man.artifacts.push_back("rnd.ckpt");
  }

  man.status = "complete";
  man.finished_at = timestamp_utc();
  man.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  man.write(man_path);
  return res;
}

}  // namespace goalex
