#pragma once

#include <vector>

#include "goalex/adam.hpp"
#include "goalex/nn.hpp"
#include "goalex/rng.hpp"

namespace goalex {

// Random network distillation pair: a frozen randomly-initialized target
// embedding and a trainable predictor of identical architecture. Novelty of
// a state is the mean squared embedding error, which equals the predictor's
// per-sample training loss.
class RndPair {
 public:
  RndPair(const NetworkSpec& spec, Shape3 input, float lr, Rng& target_init,
          Rng& predictor_init);

  // x: encoded batch [n, h, w, c]; returns one score per row.
  std::vector<float> batch_novelty(const Tensor& x) const;
  float novelty(const Tensor& single) const;

  // Minibatch gradient descent of the predictor toward the frozen target.
  // Returns the mean loss of each epoch; the target never changes.
  std::vector<float> train(const Tensor& states, int epochs, int minibatch, Rng& rng);

  uint64_t target_hash() const { return target_.param_hash(); }
  const Network& target() const { return target_; }
  const Network& predictor() const { return predictor_; }
  Network& mutable_predictor() { return predictor_; }
  int embed_dim() const { return target_.out_dim(); }

 private:
  Network target_;
  Network predictor_;
  AdamState opt_;
};

}  // namespace goalex
