#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

namespace goalex {

struct ObsDims {
  int h = 0, w = 0, c = 0;
  int64_t size() const { return static_cast<int64_t>(h) * w * c; }
  bool operator==(const ObsDims&) const = default;
};

// Rendered 8-bit image, the only agent-visible state.
struct Observation {
  ObsDims dims;
  std::vector<uint8_t> data;

  bool operator==(const Observation& o) const { return dims == o.dims && data == o.data; }
};

// Continuous action in [-1,1]^d.
using ActionVec = std::vector<float>;

// Ground-truth simulator state, for labels and metrics only.
using Sidecar = std::array<float, 3>;

ActionVec clip_action(ActionVec a);

// Deterministic single-owner environment state machine.
class Env {
 public:
  virtual ~Env() = default;
  virtual std::string id() const = 0;
  virtual ObsDims obs_dims() const = 0;
  virtual int action_dim() const = 0;
  virtual void reset(Observation& obs, Sidecar& sc) = 0;
  virtual void step(const ActionVec& a, Observation& obs, Sidecar& sc) = 0;
  virtual int64_t state_id(const Sidecar& sc) const = 0;
  virtual int64_t state_space_size() const = 0;
  virtual std::unique_ptr<Env> clone() const = 0;
};

}  // namespace goalex
