#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "goalex/adam.hpp"
#include "goalex/dataset.hpp"
#include "goalex/encode.hpp"
#include "goalex/env_cube.hpp"
#include "goalex/nn.hpp"
#include "goalex/rng.hpp"

namespace goalex {

// ---------------------------------------------------------------- rewards

struct TaskReward {
  enum class Kind { Flip, Push, PushFlip };
  Kind kind = Kind::Push;
  int target_color = kFaceYellow;
  float rho = 10.0f;
  float ty_cm = 18.0f;

  static TaskReward parse(const std::string& text, float rho, float ty_cm);
  std::string to_string() const;
};

// r = 1 - tanh(rho * (cube_y - T_y)), strictly decreasing, bounded in (0,2).
float push_reward(float cube_y_cm, float rho, float ty_cm);

float task_reward_value(const TaskReward& task, const CubeEnv& env, const Sidecar& state);
bool task_success(const TaskReward& task, const CubeEnv& env, const Sidecar& state);

// ------------------------------------------------------------- supervised

struct SupervisedConfig {
  int net_side = 21;
  std::string net;  // trunk spec; task head appended
  int epochs = 25;
  int batch = 128;
  float lr = 1e-4f;
  int64_t max_train = 0;  // subsample cap, 0 = use everything
};

// Per-dataset examples: the next-state of every transition, with labels
// extracted from the ground-truth sidecars. Observation pointers reference
// the owning replay buffer.
struct SupervisedData {
  std::vector<const uint8_t*> obs;
  std::vector<int> top_face;
  std::vector<std::array<float, 2>> pos_cm;

  static SupervisedData from(const ReplayBuffer& buffer, const CubeEnv& env);
  int64_t size() const { return static_cast<int64_t>(obs.size()); }
};

// Train/test index split of one dataset: round(test_fraction * n) test
// examples, the rest train.
struct DatasetSplit {
  std::vector<int64_t> train;
  std::vector<int64_t> test;
};
DatasetSplit split_dataset(int64_t n, double test_fraction, Rng& rng);

// Multi-dataset protocol: every dataset contributes its test slice to one
// pooled test set shared by all methods.
struct SplitResult {
  std::vector<std::vector<int64_t>> train;
  std::vector<std::pair<int, int64_t>> test;  // (dataset index, example index)
};
SplitResult split_train_test(const std::vector<int64_t>& dataset_sizes, double test_fraction,
                             Rng& rng);

// Owned copies of the pooled test examples, so dataset buffers can be freed
// between trainings. source records provenance.
struct PooledTestSet {
  ObsDims dims;
  std::vector<std::vector<uint8_t>> obs;
  std::vector<int> top_face;
  std::vector<std::array<float, 2>> pos_cm;
  std::vector<int> source;

  int64_t size() const { return static_cast<int64_t>(obs.size()); }
};
void extract_test(const SupervisedData& data, const std::vector<int64_t>& test_idx,
                  int dataset_index, ObsDims dims, PooledTestSet& out);

// Train on one dataset's train split, evaluate on the pooled test set.
float train_classifier(const SupervisedData& data, const std::vector<int64_t>& train_idx,
                       const PooledTestSet& test, ObsDims dims, const SupervisedConfig& cfg,
                       Rng& rng);
float train_regressor(const SupervisedData& data, const std::vector<int64_t>& train_idx,
                      const PooledTestSet& test, ObsDims dims, const SupervisedConfig& cfg,
                      Rng& rng, float max_cm);

float accuracy_of_predictions(const std::vector<int>& pred, const std::vector<int>& label);
float mse_of_predictions(const std::vector<std::array<float, 2>>& pred,
                         const std::vector<std::array<float, 2>>& label);

// ---------------------------------------------------------------- offline

struct OfflineConfig {
  int net_side = 21;
  std::string net;  // trunk spec
  int bc_steps = 3000;
  int q_steps = 20000;
  int batch = 16;
  float lr = 1e-4f;
  float gamma = 0.99f;
  float polyak = 0.005f;
  float bc_threshold = 0.3f;
};

// Discrete behavior-constrained Q-learner: behavior-cloning head plus a Q
// network whose bootstrap targets and greedy choices are restricted to
// actions scoring at least threshold * max under the behavior model.
class OfflinePolicy {
 public:
  OfflinePolicy(Network behavior, Network q, ObsEncoder enc, float threshold);

  CubeEnv::Move select(const Observation& obs) const;
  const Network& q_net() const { return q_; }
  const Network& behavior_net() const { return behavior_; }

 private:
  Network behavior_;
  Network q_;
  ObsEncoder enc_;
  float threshold_;
};

OfflinePolicy offline_learn(const Dataset& data, const CubeEnv& env, const TaskReward& task,
                            const OfflineConfig& cfg, Rng& rng);

// Success rate over n episodes; epsilon adds uniform-random moves during
// evaluation so repeated episodes are not all identical.
using PolicyFn = std::function<CubeEnv::Move(const Observation&)>;
float evaluate_policy(const PolicyFn& policy, CubeEnv& env, const TaskReward& task,
                      int episodes, int horizon, double epsilon, Rng& rng);

}  // namespace goalex
