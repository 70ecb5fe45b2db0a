#pragma once

#include <vector>

#include "goalex/tensor.hpp"

namespace goalex {

// Adam optimizer state for a fixed parameter list.
struct AdamState {
  float lr = 1e-4f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  static AdamState like(const std::vector<const Tensor*>& params, float lr);
};

// One bias-corrected update. grads must align with params element by element.
void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state);

}  // namespace goalex
