#include "goalex/adam.hpp"

#include <cmath>

namespace goalex {

AdamState AdamState::like(const std::vector<const Tensor*>& params, float lr) {
  AdamState st;
  st.lr = lr;
  st.m.reserve(params.size());
  st.v.reserve(params.size());
  for (const Tensor* p : params) {
    st.m.emplace_back(p->shape);
    st.v.emplace_back(p->shape);
  }
  return st;
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ConfigError("adam_step: parameter/gradient/state count mismatch");
  }
  state.step += 1;
  const float b1 = state.beta1, b2 = state.beta2;
  const float bc1 = 1.0f - std::pow(b1, static_cast<float>(state.step));
  const float bc2 = 1.0f - std::pow(b2, static_cast<float>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    if (!p.same_shape(g) || !p.same_shape(state.m[i])) {
      throw ConfigError("adam_step: shape mismatch at parameter " + std::to_string(i));
    }
    float* pp = p.ptr();
    const float* gp = g.ptr();
    float* mp = state.m[i].ptr();
    float* vp = state.v[i].ptr();
    const int64_t n = p.numel();
    for (int64_t j = 0; j < n; ++j) {
      mp[j] = b1 * mp[j] + (1.0f - b1) * gp[j];
      vp[j] = b2 * vp[j] + (1.0f - b2) * gp[j] * gp[j];
      const float mhat = mp[j] / bc1;
      const float vhat = vp[j] / bc2;
      pp[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace goalex
