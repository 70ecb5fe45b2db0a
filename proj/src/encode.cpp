#include "goalex/encode.hpp"

namespace goalex {

ObsEncoder::ObsEncoder(ObsDims obs, int net_side) : obs_(obs) {
  if (net_side <= 0 || obs.h % net_side != 0 || obs.w % net_side != 0 ||
      obs.h / net_side != obs.w / net_side) {
    throw ConfigError("network image side must evenly divide the observation side");
  }
  factor_ = obs.h / net_side;
  net_h_ = net_side;
  net_w_ = net_side;
}

void ObsEncoder::encode(const uint8_t* obs, float* dst) const {
  const int c = obs_.c;
  const float scale = 1.0f / (255.0f * static_cast<float>(factor_) * factor_);
  for (int y = 0; y < net_h_; ++y) {
    for (int x = 0; x < net_w_; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        int acc = 0;
        for (int fy = 0; fy < factor_; ++fy) {
          const uint8_t* row =
              obs + ((static_cast<int64_t>(y) * factor_ + fy) * obs_.w +
                     static_cast<int64_t>(x) * factor_) *
                        c +
              ch;
          for (int fx = 0; fx < factor_; ++fx) acc += row[static_cast<int64_t>(fx) * c];
        }
        dst[(static_cast<int64_t>(y) * net_w_ + x) * c + ch] =
            static_cast<float>(acc) * scale;
      }
    }
  }
}

Tensor ObsEncoder::encode_batch(const uint8_t* const* obs, int n) const {
  Tensor out({n, net_h_, net_w_, obs_.c});
  const int64_t plane = static_cast<int64_t>(net_h_) * net_w_ * obs_.c;
  for (int i = 0; i < n; ++i) encode(obs[i], out.ptr() + i * plane);
  return out;
}

Tensor ObsEncoder::encode_pairs(const uint8_t* const* states, const uint8_t* const* goals,
                                int n) const {
  const int c = obs_.c;
  Tensor out({n, net_h_, net_w_, 2 * c});
  std::vector<float> s_buf(static_cast<size_t>(net_h_) * net_w_ * c);
  std::vector<float> g_buf(s_buf.size());
  for (int i = 0; i < n; ++i) {
    encode(states[i], s_buf.data());
    encode(goals[i], g_buf.data());
    float* dst = out.ptr() + static_cast<int64_t>(i) * net_h_ * net_w_ * 2 * c;
    for (int64_t px = 0; px < static_cast<int64_t>(net_h_) * net_w_; ++px) {
      for (int ch = 0; ch < c; ++ch) {
        dst[px * 2 * c + ch] = s_buf[px * c + ch];
        dst[px * 2 * c + c + ch] = g_buf[px * c + ch];
      }
    }
  }
  return out;
}

}  // namespace goalex
