#pragma once

#include <memory>
#include <string>
#include <vector>

#include "goalex/config.hpp"
#include "goalex/coverage.hpp"
#include "goalex/encode.hpp"
#include "goalex/env.hpp"
#include "goalex/replay.hpp"
#include "goalex/rnd.hpp"
#include "goalex/td3.hpp"

namespace goalex {

enum class Method { GcMax, GcRandom, GcMin, Intrinsic, Random };

Method method_from_string(const std::string& s);
std::string method_to_string(Method m);

struct CollectionConfig {
  std::string env_id = "grid";
  Method method = Method::GcMax;
  uint64_t seed = 1;
  int cycles = 40;             // N
  int episodes_per_cycle = 5;  // M
  int horizon = 250;           // T
  double p_self = 0.04;
  int rnd_epochs = 4;          // K
  int rnd_batch = 64;
  float rnd_lr = 1e-4f;
  int rnd_embed = 64;
  int net_side = 21;
  int batch_size = 32;
  float noise_start = 1.5f;
  float noise_end = 0.5f;
  size_t buffer_capacity = 0;  // episodes, 0 = keep everything
  Td3Config td3;
  std::string actor_net;   // empty = default stack for this env
  std::string critic_net;
  std::string rnd_net;
  int image_side = 84;
  int cube_cells = 12;
  float cube_cell_cm = 3.0f;
  int cube_reset_cx = 5;
  int cube_reset_cy = 2;
  float cube_contact = 0.9f;
  bool debug_checks = true;
  bool record_trace = false;

  int64_t total_steps() const {
    return static_cast<int64_t>(cycles) * episodes_per_cycle * horizon;
  }
  void validate() const;
};

CollectionConfig collection_config_from(const Config& cfg);
Config collection_config_echo(const CollectionConfig& cc);
std::unique_ptr<Env> make_env(const CollectionConfig& cc);

std::string default_trunk_spec();
std::string default_actor_spec(int action_dim);
std::string default_critic_spec();
std::string default_rnd_spec(int embed_dim);

struct RunResult {
  std::string env_id;
  ReplayBuffer buffer;
  CoverageStats coverage;
  std::vector<float> goal_novelty;  // per episode; NaN for non-goal methods
  std::unique_ptr<PolicyBundle> bundle;
  std::unique_ptr<RndPair> rnd;
  std::vector<std::string> trace;  // phase events when record_trace is set
};

// Training-batch assembly, shared by the collection loop and tests.
Td3Batch build_goal_batch(const RelabeledBatch& rb, const ObsEncoder& enc, int action_dim);
Td3Batch build_intrinsic_batch(const ReplayBuffer& buffer, const RndPair& rnd,
                               const ObsEncoder& enc, int batch_size, Rng& rng);

// Runs the full collection loop: per episode, pick a goal from a replay
// subset, roll out T steps, then perform T off-policy training steps on
// dynamically relabeled batches; per cycle, train the RND predictor on the
// last M episodes. Baselines reuse the same loop with the goal/intrinsic
// machinery switched per method.
RunResult run_collection(const CollectionConfig& cfg, Env& env);
RunResult run_collection(const CollectionConfig& cfg);  // constructs the env from cfg

RunResult run_baseline_random(const CollectionConfig& cfg);
RunResult run_baseline_intrinsic(const CollectionConfig& cfg);

// Collect, then write dataset + coverage report + manifest + checkpoints
// under out_dir. Returns the result for further in-process use.
RunResult run_and_export(const CollectionConfig& cfg, const std::string& out_dir);

}  // namespace goalex
