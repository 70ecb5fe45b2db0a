#include "goalex/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "goalex/collector.hpp"

namespace goalex {

// ---------------------------------------------------------------- rewards

TaskReward TaskReward::parse(const std::string& text, float rho, float ty_cm) {
  TaskReward t;
  t.rho = rho;
  t.ty_cm = ty_cm;
  const size_t colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (head == "push") {
    if (colon != std::string::npos) throw ConfigError("push task takes no color");
    t.kind = Kind::Push;
    return t;
  }
  if (head == "flip" || head == "pushflip") {
    if (colon == std::string::npos) {
      throw ConfigError(head + " task needs a color, e.g. " + head + ":yellow");
    }
    t.kind = head == "flip" ? Kind::Flip : Kind::PushFlip;
    t.target_color = cube_face_from_name(text.substr(colon + 1));
    return t;
  }
  throw ConfigError("unknown task '" + text + "' (expected push|flip:COLOR|pushflip:COLOR)");
}

std::string TaskReward::to_string() const {
  switch (kind) {
    case Kind::Push: return "push";
    case Kind::Flip: return std::string("flip:") + kCubeFaceNames[target_color];
    case Kind::PushFlip: return std::string("pushflip:") + kCubeFaceNames[target_color];
  }
  return "?";
}

float push_reward(float cube_y_cm, float rho, float ty_cm) {
  return 1.0f - std::tanh(rho * (cube_y_cm - ty_cm));
}

float task_reward_value(const TaskReward& task, const CubeEnv& env, const Sidecar& state) {
  const CubeState s = CubeEnv::from_sidecar(state);
  const float flip = env.top_face(s.orient) == task.target_color ? 1.0f : 0.0f;
  const float push = push_reward(env.cell_to_cm(s.cy), task.rho, task.ty_cm);
  switch (task.kind) {
    case TaskReward::Kind::Flip: return flip;
    case TaskReward::Kind::Push: return push;
    case TaskReward::Kind::PushFlip: return flip + push;
  }
  return 0.0f;
}

bool task_success(const TaskReward& task, const CubeEnv& env, const Sidecar& state) {
  const CubeState s = CubeEnv::from_sidecar(state);
  const bool flipped = env.top_face(s.orient) == task.target_color;
  const bool pushed = env.cell_to_cm(s.cy) >= task.ty_cm;
  switch (task.kind) {
    case TaskReward::Kind::Flip: return flipped;
    case TaskReward::Kind::Push: return pushed;
    case TaskReward::Kind::PushFlip: return flipped && pushed;
  }
  return false;
}

// ------------------------------------------------------------- supervised

SupervisedData SupervisedData::from(const ReplayBuffer& buffer, const CubeEnv& env) {
  SupervisedData d;
  const int64_t n = buffer.transition_count();
  d.obs.reserve(static_cast<size_t>(n));
  d.top_face.reserve(static_cast<size_t>(n));
  d.pos_cm.reserve(static_cast<size_t>(n));
  for (size_t e = 0; e < buffer.episode_count(); ++e) {
    const Episode& ep = buffer.episode(e);
    for (int t = 1; t <= ep.horizon; ++t) {
      const CubeState s = CubeEnv::from_sidecar(ep.sidecar_at(t));
      d.obs.push_back(ep.obs_at(t));
      d.top_face.push_back(env.top_face(s.orient));
      d.pos_cm.push_back({env.cell_to_cm(s.cx), env.cell_to_cm(s.cy)});
    }
  }
  return d;
}

DatasetSplit split_dataset(int64_t n, double test_fraction, Rng& rng) {
  if (n <= 0) throw ConfigError("cannot split an empty dataset");
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw ConfigError("test fraction must be in [0,1)");
  }
  const auto k = static_cast<int64_t>(std::llround(test_fraction * static_cast<double>(n)));
  DatasetSplit out;
  out.test = rng.sample_without_replacement(n, k);
  std::vector<uint8_t> is_test(static_cast<size_t>(n), 0);
  for (int64_t i : out.test) is_test[static_cast<size_t>(i)] = 1;
  out.train.reserve(static_cast<size_t>(n - k));
  for (int64_t i = 0; i < n; ++i) {
    if (!is_test[static_cast<size_t>(i)]) out.train.push_back(i);
  }
  return out;
}

SplitResult split_train_test(const std::vector<int64_t>& dataset_sizes, double test_fraction,
                             Rng& rng) {
  SplitResult out;
  for (size_t ds = 0; ds < dataset_sizes.size(); ++ds) {
    DatasetSplit split = split_dataset(dataset_sizes[ds], test_fraction, rng);
    for (int64_t i : split.test) out.test.emplace_back(static_cast<int>(ds), i);
    out.train.push_back(std::move(split.train));
  }
  return out;
}

void extract_test(const SupervisedData& data, const std::vector<int64_t>& test_idx,
                  int dataset_index, ObsDims dims, PooledTestSet& out) {
  if (out.obs.empty()) out.dims = dims;
  if (!(out.dims == dims)) throw ConfigError("pooled test set mixes observation shapes");
  for (int64_t i : test_idx) {
    const uint8_t* p = data.obs[static_cast<size_t>(i)];
    out.obs.emplace_back(p, p + dims.size());
    out.top_face.push_back(data.top_face[static_cast<size_t>(i)]);
    out.pos_cm.push_back(data.pos_cm[static_cast<size_t>(i)]);
    out.source.push_back(dataset_index);
  }
}

namespace {

struct SupervisedRun {
  Network net;
  ObsEncoder enc;
};

std::vector<int64_t> training_pool(const std::vector<int64_t>& train_idx, int64_t max_train,
                                   Rng& rng) {
  if (max_train <= 0 || static_cast<int64_t>(train_idx.size()) <= max_train) return train_idx;
  std::vector<int64_t> pool = train_idx;
  rng.shuffle(pool);
  pool.resize(static_cast<size_t>(max_train));
  std::sort(pool.begin(), pool.end());
  return pool;
}

SupervisedRun make_supervised_net(const SupervisedConfig& cfg, ObsDims dims, int out_dim,
                                  Rng& rng) {
  ObsEncoder enc(dims, cfg.net_side);
  const std::string trunk = cfg.net.empty() ? default_trunk_spec() : cfg.net;
  NetworkSpec spec =
      NetworkSpec::parse(trunk + ",dense:" + std::to_string(out_dim) + ":none");
  Network net(spec, enc.encoded_shape(), 0, rng);
  return SupervisedRun{std::move(net), std::move(enc)};
}

void train_supervised(SupervisedRun& run, const SupervisedData& data,
                      const std::vector<int64_t>& pool, const SupervisedConfig& cfg,
                      const std::function<void(int64_t, float*)>& fill_target, int out_dim,
                      Rng& rng) {
  AdamState opt = AdamState::like(std::as_const(run.net).params(), cfg.lr);
  auto params = run.net.params();
  std::vector<int64_t> order = pool;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch)) {
      const int n = static_cast<int>(
          std::min<size_t>(static_cast<size_t>(cfg.batch), order.size() - start));
      std::vector<const uint8_t*> ptrs(static_cast<size_t>(n));
      Tensor target({n, out_dim});
      for (int i = 0; i < n; ++i) {
        const int64_t idx = order[start + static_cast<size_t>(i)];
        ptrs[static_cast<size_t>(i)] = data.obs[static_cast<size_t>(idx)];
        fill_target(idx, target.ptr() + static_cast<int64_t>(i) * out_dim);
      }
      const Tensor x = run.enc.encode_batch(ptrs.data(), n);
      Network::Trace trace;
      const Tensor out = run.net.forward(x, nullptr, &trace);
      MseResult mse = mse_loss(out, target);
      auto grads = run.net.backward(trace, mse.grad);
      adam_step(params, Network::grad_ptrs(grads), opt);
    }
  }
}

Tensor eval_forward(const SupervisedRun& run, const PooledTestSet& test) {
  const int out_dim = run.net.out_dim();
  Tensor preds({static_cast<int>(test.size()), out_dim});
  constexpr size_t kChunk = 256;
  for (size_t start = 0; start < test.obs.size(); start += kChunk) {
    const int n = static_cast<int>(std::min(kChunk, test.obs.size() - start));
    std::vector<const uint8_t*> ptrs(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      ptrs[static_cast<size_t>(i)] = test.obs[start + static_cast<size_t>(i)].data();
    }
    const Tensor x = run.enc.encode_batch(ptrs.data(), n);
    const Tensor out = run.net.forward(x);
    std::memcpy(preds.ptr() + static_cast<int64_t>(start) * out_dim, out.ptr(),
                sizeof(float) * static_cast<size_t>(out.numel()));
  }
  return preds;
}

}  // namespace

float accuracy_of_predictions(const std::vector<int>& pred, const std::vector<int>& label) {
  if (pred.size() != label.size() || pred.empty()) {
    throw ConfigError("accuracy: size mismatch");
  }
  int64_t hit = 0;
  for (size_t i = 0; i < pred.size(); ++i) hit += pred[i] == label[i] ? 1 : 0;
  return static_cast<float>(hit) / static_cast<float>(pred.size());
}

float mse_of_predictions(const std::vector<std::array<float, 2>>& pred,
                         const std::vector<std::array<float, 2>>& label) {
  if (pred.size() != label.size() || pred.empty()) throw ConfigError("mse: size mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    for (size_t j = 0; j < 2; ++j) {
      const double d =
          static_cast<double>(pred[i][j]) - static_cast<double>(label[i][j]);
      acc += d * d;
    }
  }
  return static_cast<float>(acc / (2.0 * static_cast<double>(pred.size())));
}

float train_classifier(const SupervisedData& data, const std::vector<int64_t>& train_idx,
                       const PooledTestSet& test, ObsDims dims, const SupervisedConfig& cfg,
                       Rng& rng) {
  if (train_idx.empty()) throw ConfigError("classifier: empty training split");
  SupervisedRun run = make_supervised_net(cfg, dims, 6, rng);
  const auto pool = training_pool(train_idx, cfg.max_train, rng);
  {
    const int first = data.top_face[static_cast<size_t>(pool.front())];
    bool single = true;
    for (int64_t i : pool) {
      if (data.top_face[static_cast<size_t>(i)] != first) {
        single = false;
        break;
      }
    }
    if (single) std::fprintf(stderr, "classifier: training set has a single class\n");
  }
  train_supervised(
      run, data, pool, cfg,
      [&data](int64_t idx, float* dst) {
        std::fill(dst, dst + 6, 0.0f);
        dst[data.top_face[static_cast<size_t>(idx)]] = 1.0f;
      },
      6, rng);

  const Tensor preds = eval_forward(run, test);
  std::vector<int> pred_cls(static_cast<size_t>(test.size()));
  for (size_t i = 0; i < pred_cls.size(); ++i) {
    const float* row = preds.ptr() + static_cast<int64_t>(i) * 6;
    pred_cls[i] = static_cast<int>(std::max_element(row, row + 6) - row);
  }
  return accuracy_of_predictions(pred_cls, test.top_face);
}

float train_regressor(const SupervisedData& data, const std::vector<int64_t>& train_idx,
                      const PooledTestSet& test, ObsDims dims, const SupervisedConfig& cfg,
                      Rng& rng, float max_cm) {
  if (train_idx.empty()) throw ConfigError("regressor: empty training split");
  SupervisedRun run = make_supervised_net(cfg, dims, 2, rng);
  // Positions train in table-normalized units; errors are reported in cm^2.
  const float scale = 1.0f / std::max(max_cm, 1.0f);
  const auto pool = training_pool(train_idx, cfg.max_train, rng);
  train_supervised(
      run, data, pool, cfg,
      [&data, scale](int64_t idx, float* dst) {
        dst[0] = data.pos_cm[static_cast<size_t>(idx)][0] * scale;
        dst[1] = data.pos_cm[static_cast<size_t>(idx)][1] * scale;
      },
      2, rng);

  const Tensor preds = eval_forward(run, test);
  std::vector<std::array<float, 2>> pred_cm(static_cast<size_t>(test.size()));
  for (size_t i = 0; i < pred_cm.size(); ++i) {
    const float* row = preds.ptr() + static_cast<int64_t>(i) * 2;
    pred_cm[i] = {row[0] * std::max(max_cm, 1.0f), row[1] * std::max(max_cm, 1.0f)};
  }
  return mse_of_predictions(pred_cm, test.pos_cm);
}

// ---------------------------------------------------------------- offline

OfflinePolicy::OfflinePolicy(Network behavior, Network q, ObsEncoder enc, float threshold)
    : behavior_(std::move(behavior)),
      q_(std::move(q)),
      enc_(std::move(enc)),
      threshold_(threshold) {}

namespace {

int constrained_argmax(const float* b_scores, const float* q_values, float threshold) {
  float bmax = b_scores[0];
  for (int a = 1; a < CubeEnv::kMoveCount; ++a) bmax = std::max(bmax, b_scores[a]);
  const float cut = threshold * bmax;
  int best = -1;
  for (int a = 0; a < CubeEnv::kMoveCount; ++a) {
    if (bmax > 0.0f && b_scores[a] < cut) continue;
    if (best < 0 || q_values[a] > q_values[best]) best = a;
  }
  return best < 0 ? 0 : best;
}

}  // namespace

CubeEnv::Move OfflinePolicy::select(const Observation& obs) const {
  const uint8_t* p = obs.data.data();
  const Tensor x = enc_.encode_batch(&p, 1);
  const Tensor b = behavior_.forward(x);
  const Tensor q = q_.forward(x);
  return static_cast<CubeEnv::Move>(constrained_argmax(b.ptr(), q.ptr(), threshold_));
}

OfflinePolicy offline_learn(const Dataset& data, const CubeEnv& env, const TaskReward& task,
                            const OfflineConfig& cfg, Rng& rng) {
  if (data.env_id != "cube") {
    throw ConfigError("offline task '" + task.to_string() +
                      "' requires a cube dataset, got env '" + data.env_id + "'");
  }
  const ReplayBuffer& buf = data.buffer;
  if (buf.episode_count() == 0) throw ConfigError("offline_learn: empty dataset");
  ObsEncoder enc(buf.dims(), cfg.net_side);
  const Shape3 in_shape = enc.encoded_shape();
  const std::string trunk = cfg.net.empty() ? default_trunk_spec() : cfg.net;
  const NetworkSpec head8 = NetworkSpec::parse(trunk + ",dense:8:none");
  Network behavior(head8, in_shape, 0, rng);
  Network q(head8, in_shape, 0, rng);
  Network q_target(head8, in_shape, 0, rng);
  q_target.copy_params_from(q);

  // Rewards relabeled post-hoc from sidecars; actions decoded to the 8
  // discrete moves the collection policy commanded.
  const int T = buf.horizon();
  const int64_t n_tr = buf.transition_count();
  std::vector<uint8_t> move_label(static_cast<size_t>(n_tr));
  std::vector<float> reward(static_cast<size_t>(n_tr));
  for (int64_t i = 0; i < n_tr; ++i) {
    const TransitionRef tr = buf.transition(i);
    ActionVec a(tr.action(), tr.action() + buf.action_dim());
    move_label[static_cast<size_t>(i)] = static_cast<uint8_t>(env.decode_intent(a));
    reward[static_cast<size_t>(i)] = task_reward_value(task, env, tr.sidecar_next());
  }

  // All observations encoded once; minibatches gather rows from this cache.
  const int64_t obs_per_ep = T + 1;
  const int64_t n_obs = static_cast<int64_t>(buf.episode_count()) * obs_per_ep;
  const int64_t plane = in_shape.numel();
  Tensor encoded({static_cast<int>(n_obs), in_shape.h, in_shape.w, in_shape.c});
  {
    std::vector<const uint8_t*> ptrs(static_cast<size_t>(n_obs));
    int64_t k = 0;
    for (size_t e = 0; e < buf.episode_count(); ++e) {
      for (int t = 0; t <= T; ++t) ptrs[static_cast<size_t>(k++)] = buf.episode(e).obs_at(t);
    }
    for (int64_t start = 0; start < n_obs; start += 1024) {
      const int n = static_cast<int>(std::min<int64_t>(1024, n_obs - start));
      const Tensor chunk = enc.encode_batch(ptrs.data() + start, n);
      std::memcpy(encoded.ptr() + start * plane, chunk.ptr(),
                  sizeof(float) * static_cast<size_t>(chunk.numel()));
    }
  }
  auto obs_row = [&](int64_t flat_tr, bool next) {
    const int64_t e = flat_tr / T;
    const int64_t t = flat_tr % T + (next ? 1 : 0);
    return e * obs_per_ep + t;
  };
  auto gather = [&](const std::vector<int64_t>& rows) {
    Tensor out({static_cast<int>(rows.size()), in_shape.h, in_shape.w, in_shape.c});
    for (size_t i = 0; i < rows.size(); ++i) {
      std::memcpy(out.ptr() + static_cast<int64_t>(i) * plane,
                  encoded.ptr() + rows[i] * plane,
                  sizeof(float) * static_cast<size_t>(plane));
    }
    return out;
  };

  // Behavior cloning phase.
  {
    AdamState opt = AdamState::like(std::as_const(behavior).params(), cfg.lr);
    auto params = behavior.params();
    std::vector<int64_t> rows(static_cast<size_t>(cfg.batch));
    for (int step = 0; step < cfg.bc_steps; ++step) {
      Tensor target({cfg.batch, 8});
      for (int i = 0; i < cfg.batch; ++i) {
        const int64_t pick = rng.uniform_int(n_tr);
        rows[static_cast<size_t>(i)] = obs_row(pick, false);
        float* dst = target.ptr() + static_cast<int64_t>(i) * 8;
        std::fill(dst, dst + 8, 0.0f);
        dst[move_label[static_cast<size_t>(pick)]] = 1.0f;
      }
      const Tensor x = gather(rows);
      Network::Trace trace;
      const Tensor out = behavior.forward(x, nullptr, &trace);
      MseResult mse = mse_loss(out, target);
      auto grads = behavior.backward(trace, mse.grad);
      adam_step(params, Network::grad_ptrs(grads), opt);
    }
  }

  // Allowed-action masks from the frozen behavior model for every
  // observation that can appear as a bootstrap next-state.
  std::vector<uint8_t> allowed(static_cast<size_t>(n_obs) * 8, 1);
  for (int64_t start = 0; start < n_obs; start += 1024) {
    const int n = static_cast<int>(std::min<int64_t>(1024, n_obs - start));
    std::vector<int64_t> rows(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) rows[static_cast<size_t>(i)] = start + i;
    const Tensor b = behavior.forward(gather(rows));
    for (int i = 0; i < n; ++i) {
      const float* s = b.ptr() + static_cast<int64_t>(i) * 8;
      float bmax = s[0];
      for (int a = 1; a < 8; ++a) bmax = std::max(bmax, s[a]);
      for (int a = 0; a < 8; ++a) {
        allowed[static_cast<size_t>(start + i) * 8 + static_cast<size_t>(a)] =
            (bmax <= 0.0f || s[a] >= cfg.bc_threshold * bmax) ? 1 : 0;
      }
    }
  }

  // Constrained Q iteration.
  {
    AdamState opt = AdamState::like(std::as_const(q).params(), cfg.lr);
    auto params = q.params();
    std::vector<int64_t> s_rows(static_cast<size_t>(cfg.batch));
    std::vector<int64_t> sn_rows(static_cast<size_t>(cfg.batch));
    std::vector<int64_t> picks(static_cast<size_t>(cfg.batch));
    for (int step = 0; step < cfg.q_steps; ++step) {
      for (int i = 0; i < cfg.batch; ++i) {
        picks[static_cast<size_t>(i)] = rng.uniform_int(n_tr);
        s_rows[static_cast<size_t>(i)] = obs_row(picks[static_cast<size_t>(i)], false);
        sn_rows[static_cast<size_t>(i)] = obs_row(picks[static_cast<size_t>(i)], true);
      }
      const Tensor x = gather(s_rows);
      const Tensor xn = gather(sn_rows);
      const Tensor qn = q_target.forward(xn);
      Network::Trace trace;
      const Tensor qs = q.forward(x, nullptr, &trace);

      Tensor upstream({cfg.batch, 8});
      const float inv_n = 1.0f / static_cast<float>(cfg.batch);
      for (int i = 0; i < cfg.batch; ++i) {
        const int64_t pick = picks[static_cast<size_t>(i)];
        const uint8_t* mask = allowed.data() + sn_rows[static_cast<size_t>(i)] * 8;
        const float* qrow = qn.ptr() + static_cast<int64_t>(i) * 8;
        float best = -std::numeric_limits<float>::infinity();
        for (int a = 0; a < 8; ++a) {
          if (mask[a]) best = std::max(best, qrow[a]);
        }
        const float y = reward[static_cast<size_t>(pick)] + cfg.gamma * best;
        const int act = move_label[static_cast<size_t>(pick)];
        const float pred = qs.data[static_cast<size_t>(i) * 8 + static_cast<size_t>(act)];
        upstream.data[static_cast<size_t>(i) * 8 + static_cast<size_t>(act)] =
            2.0f * (pred - y) * inv_n;
      }
      auto grads = q.backward(trace, upstream);
      adam_step(params, Network::grad_ptrs(grads), opt);

      auto op = std::as_const(q).params();
      auto tp = q_target.params();
      for (size_t pi = 0; pi < op.size(); ++pi) {
        const float* o = op[pi]->ptr();
        float* t = tp[pi]->ptr();
        for (int64_t j = 0; j < op[pi]->numel(); ++j) {
          t[j] += cfg.polyak * (o[j] - t[j]);
        }
      }
    }
  }

  return OfflinePolicy(std::move(behavior), std::move(q), std::move(enc), cfg.bc_threshold);
}

float evaluate_policy(const PolicyFn& policy, CubeEnv& env, const TaskReward& task,
                      int episodes, int horizon, double epsilon, Rng& rng) {
  if (episodes <= 0) throw ConfigError("evaluate_policy: episodes must be >= 1");
  int successes = 0;
  Observation obs;
  Sidecar sc;
  for (int e = 0; e < episodes; ++e) {
    env.reset(obs, sc);
    for (int t = 0; t < horizon; ++t) {
      CubeEnv::Move m;
      if (epsilon > 0.0 && rng.bernoulli(epsilon)) {
        m = static_cast<CubeEnv::Move>(rng.uniform_int(CubeEnv::kMoveCount));
      } else {
        m = policy(obs);
      }
      env.step(CubeEnv::move_to_action(m), obs, sc);
    }
    if (task_success(task, env, sc)) ++successes;
  }
  return static_cast<float>(successes) / static_cast<float>(episodes);
}

}  // namespace goalex
