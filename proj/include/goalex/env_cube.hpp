#pragma once

#include "goalex/env.hpp"

namespace goalex {

// Die-style cube on a cell grid: position plus one of the 24 orientations of
// the face-labeling rotation group.
struct CubeState {
  int cx = 0;     // row cell, north = -cx
  int cy = 0;     // column cell, east = +cy (the push direction)
  int orient = 0; // index into the 24-element orientation table
};

struct CubeParams {
  int cells = 12;
  float cell_cm = 3.0f;
  int image_side = 84;
  int reset_cx = 5;
  int reset_cy = 2;
  // A decoded move executes only when max(|a0|,|a1|) reaches this value;
  // soft commands leave the cube untouched.
  float contact = 0.9f;
};

enum CubeFace : int {
  kFaceYellow = 0,
  kFaceRed = 1,
  kFaceGreen = 2,
  kFaceBlue = 3,
  kFaceOrange = 4,
  kFaceWhite = 5,
};

extern const char* const kCubeFaceNames[6];
int cube_face_from_name(const std::string& name);

class CubeEnv : public Env {
 public:
  static constexpr int kOrientations = 24;
  enum Move { kPushN, kPushS, kPushE, kPushW, kRollN, kRollS, kRollE, kRollW };
  static constexpr int kMoveCount = 8;

  explicit CubeEnv(CubeParams params = {});

  CubeState initial_state() const;
  CubeState step_state(const CubeState& s, const ActionVec& a) const;
  CubeState apply_move(const CubeState& s, Move m) const;
  Observation render(const CubeState& s) const;
  int64_t state_to_id(const CubeState& s) const;

  int top_face(int orient) const { return top_face_[static_cast<size_t>(orient)]; }
  int north_face(int orient) const { return north_face_[static_cast<size_t>(orient)]; }
  int east_face(int orient) const { return east_face_[static_cast<size_t>(orient)]; }
  int roll_orient(int orient, int roll_dir) const {  // roll_dir in {N,S,E,W} = 0..3
    return roll_table_[static_cast<size_t>(orient)][static_cast<size_t>(roll_dir)];
  }
  float cell_to_cm(int cell) const { return static_cast<float>(cell) * params_.cell_cm; }
  const CubeParams& params() const { return params_; }
  const CubeState& state() const { return state_; }

  // Decodes an action to a move, or returns false when below the contact
  // threshold. Exposed for the offline learner's discrete interface.
  bool decode_action(const ActionVec& a, Move& move) const;
  // The commanded move regardless of the contact gate.
  Move decode_intent(const ActionVec& a) const;
  static ActionVec move_to_action(Move m);

  // Env interface.
  std::string id() const override { return "cube"; }
  ObsDims obs_dims() const override { return {params_.image_side, params_.image_side, 3}; }
  int action_dim() const override { return 3; }
  void reset(Observation& obs, Sidecar& sc) override;
  void step(const ActionVec& a, Observation& obs, Sidecar& sc) override;
  int64_t state_id(const Sidecar& sc) const override;
  int64_t state_space_size() const override {
    return static_cast<int64_t>(params_.cells) * params_.cells * kOrientations;
  }
  std::unique_ptr<Env> clone() const override { return std::make_unique<CubeEnv>(*this); }

  static Sidecar to_sidecar(const CubeState& s);
  static CubeState from_sidecar(const Sidecar& sc);

 private:
  CubeParams params_;
  CubeState state_;
  std::array<std::array<int, 4>, 24> roll_table_;
  std::array<int, 24> top_face_;
  std::array<int, 24> north_face_;
  std::array<int, 24> east_face_;
};

}  // namespace goalex
