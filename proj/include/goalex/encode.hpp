#pragma once

#include <cstdint>

#include "goalex/env.hpp"
#include "goalex/nn.hpp"
#include "goalex/tensor.hpp"

namespace goalex {

// Turns raw 8-bit observations into network inputs: scale to [0,1] and
// average-pool by an integer factor. The same preprocessing feeds the agent
// and the RND pair.
class ObsEncoder {
 public:
  ObsEncoder(ObsDims obs, int net_side);

  Shape3 encoded_shape() const { return {net_h_, net_w_, obs_.c}; }

  // Writes one encoded observation into dst (net_h*net_w*c floats).
  void encode(const uint8_t* obs, float* dst) const;

  // Batch of observations, NHWC float tensor [n, net_h, net_w, c].
  Tensor encode_batch(const uint8_t* const* obs, int n) const;

  // Batch of (state, goal) pairs concatenated in the channel dimension:
  // [n, net_h, net_w, 2c].
  Tensor encode_pairs(const uint8_t* const* states, const uint8_t* const* goals, int n) const;

  ObsDims obs_dims() const { return obs_; }

 private:
  ObsDims obs_;
  int factor_;
  int net_h_, net_w_;
};

}  // namespace goalex
