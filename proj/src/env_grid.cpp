#include "goalex/env_grid.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "goalex/tensor.hpp"

namespace goalex {

namespace {

// cos/sin for multiples of 30 degrees, exact constants (no libm trig).
constexpr double kHalfSqrt3 = 0.86602540378443864676;
const double kCos[12] = {1,  kHalfSqrt3,  0.5, 0, -0.5, -kHalfSqrt3,
                         -1, -kHalfSqrt3, -0.5, 0, 0.5,  kHalfSqrt3};
const double kSin[12] = {0,  0.5,  kHalfSqrt3,  1,  kHalfSqrt3,  0.5,
                         0, -0.5, -kHalfSqrt3, -1, -kHalfSqrt3, -0.5};

}  // namespace

GridEnv::GridEnv(int side) : side_(side) {
  if (side_ < 16) throw ConfigError("grid side too small");
  // 13x9 rectangle with a 4x3 notch removed from the top-right corner, so
  // every 30-degree rotation renders a distinct mask.
  for (int dy = -4; dy <= 4; ++dy) {
    for (int dx = -6; dx <= 6; ++dx) {
      if (dx >= 3 && dy <= -2) continue;  // the notch
      base_sprite_.emplace_back(dx, dy);
    }
  }
  for (int r = 0; r < kRotations; ++r) {
    std::set<std::pair<int, int>> pts;
    for (auto [dx, dy] : base_sprite_) {
      // 2x2 subsamples per source pixel keep the rotated mask hole-free.
      for (double ox : {-0.25, 0.25}) {
        for (double oy : {-0.25, 0.25}) {
          const double px = dx + ox, py = dy + oy;
          const double rx = kCos[r] * px - kSin[r] * py;
          const double ry = kSin[r] * px + kCos[r] * py;
          pts.emplace(static_cast<int>(std::lround(rx)), static_cast<int>(std::lround(ry)));
        }
      }
    }
    sprites_[static_cast<size_t>(r)].assign(pts.begin(), pts.end());
  }
  state_ = initial_state();
}

GridState GridEnv::initial_state() const { return GridState{side_ / 2, side_ / 2, 0}; }

GridState GridEnv::step_state(const GridState& s, const ActionVec& a) const {
  if (a.size() != 3) throw ConfigError("grid action must have 3 components");
  ActionVec c = clip_action(a);
  int axis = 0;
  float best = std::fabs(c[0]);
  for (int i = 1; i < 3; ++i) {
    if (std::fabs(c[i]) > best) {
      best = std::fabs(c[i]);
      axis = i;
    }
  }
  const int dir = c[static_cast<size_t>(axis)] >= 0.0f ? 1 : -1;
  GridState n = s;
  switch (axis) {
    case 0: n.x = std::clamp(s.x + dir, 0, side_ - 1); break;
    case 1: n.y = std::clamp(s.y + dir, 0, side_ - 1); break;
    case 2: n.rot = ((s.rot + dir) % kRotations + kRotations) % kRotations; break;
  }
  return n;
}

Observation GridEnv::render(const GridState& s) const {
  Observation obs;
  obs.dims = obs_dims();
  obs.data.assign(static_cast<size_t>(obs.dims.size()), 0);
  for (auto [dx, dy] : sprites_[static_cast<size_t>(s.rot)]) {
    const int px = s.x + dx;
    const int py = s.y + dy;
    if (px < 0 || px >= side_ || py < 0 || py >= side_) continue;
    obs.data[static_cast<size_t>(py) * side_ + px] = 255;
  }
  return obs;
}

int64_t GridEnv::state_to_id(const GridState& s) const {
  return (static_cast<int64_t>(s.x) * side_ + s.y) * kRotations + s.rot;
}

GridState GridEnv::id_to_state(int64_t id) const {
  GridState s;
  s.rot = static_cast<int>(id % kRotations);
  id /= kRotations;
  s.y = static_cast<int>(id % side_);
  s.x = static_cast<int>(id / side_);
  return s;
}

void GridEnv::reset(Observation& obs, Sidecar& sc) {
  state_ = initial_state();
  obs = render(state_);
  sc = to_sidecar(state_);
}

void GridEnv::step(const ActionVec& a, Observation& obs, Sidecar& sc) {
  state_ = step_state(state_, a);
  obs = render(state_);
  sc = to_sidecar(state_);
}

int64_t GridEnv::state_id(const Sidecar& sc) const { return state_to_id(from_sidecar(sc)); }

Sidecar GridEnv::to_sidecar(const GridState& s) {
  return {static_cast<float>(s.x), static_cast<float>(s.y), static_cast<float>(s.rot)};
}

GridState GridEnv::from_sidecar(const Sidecar& sc) {
  return GridState{static_cast<int>(sc[0]), static_cast<int>(sc[1]), static_cast<int>(sc[2])};
}

ActionVec clip_action(ActionVec a) {
  for (auto& v : a) v = std::clamp(v, -1.0f, 1.0f);
  return a;
}

}  // namespace goalex
