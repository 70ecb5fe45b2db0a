#include "goalex/rnd.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <utility>

namespace goalex {

RndPair::RndPair(const NetworkSpec& spec, Shape3 input, float lr, Rng& target_init,
                 Rng& predictor_init)
    : target_(spec, input, 0, target_init),
      predictor_(spec, input, 0, predictor_init),
      opt_(AdamState::like(std::as_const(predictor_).params(), lr)) {}

std::vector<float> RndPair::batch_novelty(const Tensor& x) const {
  // Evaluated one row at a time: scores are then bit-identical no matter
  // how states are batched, which the goal-selection tie-break relies on.
  const int n = x.dim(0);
  const int64_t plane = n > 0 ? x.numel() / n : 0;
  const int k = target_.out_dim();
  Tensor single({1, x.dim(1), x.dim(2), x.dim(3)});
  std::vector<float> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::memcpy(single.ptr(), x.ptr() + static_cast<int64_t>(i) * plane,
                sizeof(float) * static_cast<size_t>(plane));
    const Tensor t = target_.forward(single);
    const Tensor p = predictor_.forward(single);
    double acc = 0.0;
    for (int j = 0; j < k; ++j) {
      const double d =
          static_cast<double>(p.data[static_cast<size_t>(j)]) -
          static_cast<double>(t.data[static_cast<size_t>(j)]);
      acc += d * d;
    }
    out[static_cast<size_t>(i)] = static_cast<float>(acc / k);
  }
  return out;
}

float RndPair::novelty(const Tensor& single) const { return batch_novelty(single)[0]; }

std::vector<float> RndPair::train(const Tensor& states, int epochs, int minibatch, Rng& rng) {
  if (epochs <= 0) return {};
  const int n = states.dim(0);
  if (n == 0) {
    std::fprintf(stderr, "rnd: train called with no states, skipping\n");
    return {};
  }
  const int64_t plane = states.numel() / n;
  std::vector<int64_t> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;

  std::vector<float> epoch_losses;
  auto params = predictor_.params();
  for (int e = 0; e < epochs; ++e) {
    rng.shuffle(order);
    double loss_acc = 0.0;
    for (int start = 0; start < n; start += minibatch) {
      const int m = std::min(minibatch, n - start);
      Tensor batch({m, states.dim(1), states.dim(2), states.dim(3)});
      for (int i = 0; i < m; ++i) {
        std::memcpy(batch.ptr() + static_cast<int64_t>(i) * plane,
                    states.ptr() + order[static_cast<size_t>(start + i)] * plane,
                    sizeof(float) * static_cast<size_t>(plane));
      }
      const Tensor target_out = target_.forward(batch);
      Network::Trace trace;
      const Tensor pred_out = predictor_.forward(batch, nullptr, &trace);
      MseResult mse = mse_loss(pred_out, target_out);
      loss_acc += static_cast<double>(mse.loss) * m;
      auto grads = predictor_.backward(trace, mse.grad);
      adam_step(params, Network::grad_ptrs(grads), opt_);
    }
    epoch_losses.push_back(static_cast<float>(loss_acc / n));
  }
  return epoch_losses;
}

}  // namespace goalex
