#pragma once

#include "goalex/env.hpp"

namespace goalex {

// Moving/rotating sprite on a black background. Position is the sprite
// center in pixels, rotation advances in 30-degree increments.
struct GridState {
  int x = 0;    // column in [0, side)
  int y = 0;    // row in [0, side)
  int rot = 0;  // in [0, 12)
};

class GridEnv : public Env {
 public:
  static constexpr int kRotations = 12;

  explicit GridEnv(int side = 84);

  // Pure dynamics: one of {+-x, +-y, +-rot} per step, positions saturate at
  // the borders, rotation wraps mod 12.
  GridState initial_state() const;
  GridState step_state(const GridState& s, const ActionVec& a) const;
  Observation render(const GridState& s) const;
  int64_t state_to_id(const GridState& s) const;
  GridState id_to_state(int64_t id) const;

  int side() const { return side_; }
  int sprite_pixel_count() const { return static_cast<int>(base_sprite_.size()); }
  const GridState& state() const { return state_; }

  // Env interface.
  std::string id() const override { return "grid"; }
  ObsDims obs_dims() const override { return {side_, side_, 1}; }
  int action_dim() const override { return 3; }
  void reset(Observation& obs, Sidecar& sc) override;
  void step(const ActionVec& a, Observation& obs, Sidecar& sc) override;
  int64_t state_id(const Sidecar& sc) const override;
  int64_t state_space_size() const override {
    return static_cast<int64_t>(side_) * side_ * kRotations;
  }
  std::unique_ptr<Env> clone() const override { return std::make_unique<GridEnv>(*this); }

  static Sidecar to_sidecar(const GridState& s);
  static GridState from_sidecar(const Sidecar& sc);

 private:
  int side_;
  GridState state_;
  std::vector<std::pair<int, int>> base_sprite_;              // (dx, dy) offsets
  std::array<std::vector<std::pair<int, int>>, 12> sprites_;  // rotated masks
};

}  // namespace goalex
