#include "goalex/env_cube.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "goalex/tensor.hpp"

namespace goalex {

namespace {

// Face labels at positions [top, bottom, north, south, east, west].
// Opposite faces sum to 5.
using FaceMap = std::array<int, 6>;
constexpr int kTop = 0, kBottom = 1, kNorth = 2, kSouth = 3, kEast = 4, kWest = 5;

FaceMap roll_faces(const FaceMap& f, int dir) {
  FaceMap n = f;
  switch (dir) {
    case 0:  // roll north: top tips toward north
      n[kNorth] = f[kTop];
      n[kBottom] = f[kNorth];
      n[kSouth] = f[kBottom];
      n[kTop] = f[kSouth];
      break;
    case 1:  // roll south
      n[kSouth] = f[kTop];
      n[kBottom] = f[kSouth];
      n[kNorth] = f[kBottom];
      n[kTop] = f[kNorth];
      break;
    case 2:  // roll east
      n[kEast] = f[kTop];
      n[kBottom] = f[kEast];
      n[kWest] = f[kBottom];
      n[kTop] = f[kWest];
      break;
    case 3:  // roll west
      n[kWest] = f[kTop];
      n[kBottom] = f[kWest];
      n[kEast] = f[kBottom];
      n[kTop] = f[kEast];
      break;
  }
  return n;
}

const uint8_t kFaceRgb[6][3] = {
    {255, 220, 0},    // yellow
    {220, 30, 30},    // red
    {30, 180, 40},    // green
    {40, 70, 230},    // blue
    {250, 140, 20},   // orange
    {240, 240, 240},  // white
};

}  // namespace

const char* const kCubeFaceNames[6] = {"yellow", "red", "green", "blue", "orange", "white"};

int cube_face_from_name(const std::string& name) {
  for (int i = 0; i < 6; ++i) {
    if (name == kCubeFaceNames[i]) return i;
  }
  throw ConfigError("unknown cube face color '" + name + "'");
}

CubeEnv::CubeEnv(CubeParams params) : params_(params) {
  if (params_.cells < 2) throw ConfigError("cube table needs at least 2x2 cells");
  if (params_.image_side % params_.cells != 0) {
    throw ConfigError("cube image side must be a multiple of the cell count");
  }
  if (params_.reset_cx < 0 || params_.reset_cx >= params_.cells || params_.reset_cy < 0 ||
      params_.reset_cy >= params_.cells) {
    throw ConfigError("cube reset cell out of range");
  }

  // Enumerate the rotation group by breadth-first search from the canonical
  // yellow-up orientation.
  const FaceMap canonical = {kFaceYellow, kFaceWhite, kFaceRed,
                             kFaceOrange, kFaceGreen, kFaceBlue};
  std::vector<FaceMap> orients{canonical};
  std::map<FaceMap, int> index{{canonical, 0}};
  for (size_t head = 0; head < orients.size(); ++head) {
    const FaceMap cur = orients[head];
    for (int dir = 0; dir < 4; ++dir) {
      FaceMap nxt = roll_faces(cur, dir);
      if (index.emplace(nxt, static_cast<int>(orients.size())).second) {
        orients.push_back(nxt);
      }
    }
  }
  if (orients.size() != kOrientations) throw ConfigError("orientation group size mismatch");
  for (int i = 0; i < kOrientations; ++i) {
    const FaceMap& f = orients[static_cast<size_t>(i)];
    top_face_[static_cast<size_t>(i)] = f[kTop];
    north_face_[static_cast<size_t>(i)] = f[kNorth];
    east_face_[static_cast<size_t>(i)] = f[kEast];
    for (int dir = 0; dir < 4; ++dir) {
      roll_table_[static_cast<size_t>(i)][static_cast<size_t>(dir)] =
          index.at(roll_faces(f, dir));
    }
  }
  state_ = initial_state();
}

CubeState CubeEnv::initial_state() const {
  return CubeState{params_.reset_cx, params_.reset_cy, 0};
}

bool CubeEnv::decode_action(const ActionVec& a, Move& move) const {
  if (a.size() != 3) throw ConfigError("cube action must have 3 components");
  ActionVec c = clip_action(a);
  const float m0 = std::fabs(c[0]), m1 = std::fabs(c[1]);
  move = decode_intent(a);
  return std::max(m0, m1) >= params_.contact;
}

CubeEnv::Move CubeEnv::decode_intent(const ActionVec& a) const {
  if (a.size() != 3) throw ConfigError("cube action must have 3 components");
  ActionVec c = clip_action(a);
  const float m0 = std::fabs(c[0]), m1 = std::fabs(c[1]);
  const int axis = (m0 >= m1) ? 0 : 1;
  const bool positive = c[static_cast<size_t>(axis)] >= 0.0f;
  const bool roll = c[2] > 0.0f;
  // axis 0: +south/-north rows; axis 1: +east/-west columns.
  if (axis == 0) {
    return positive ? (roll ? kRollS : kPushS) : (roll ? kRollN : kPushN);
  }
  return positive ? (roll ? kRollE : kPushE) : (roll ? kRollW : kPushW);
}

ActionVec CubeEnv::move_to_action(Move m) {
  const bool roll = m >= kRollN;
  switch (m) {
    case kPushN: case kRollN: return {-1.0f, 0.0f, roll ? 1.0f : -1.0f};
    case kPushS: case kRollS: return {1.0f, 0.0f, roll ? 1.0f : -1.0f};
    case kPushE: case kRollE: return {0.0f, 1.0f, roll ? 1.0f : -1.0f};
    case kPushW: case kRollW: return {0.0f, -1.0f, roll ? 1.0f : -1.0f};
  }
  return {0.0f, 0.0f, -1.0f};
}

CubeState CubeEnv::apply_move(const CubeState& s, Move m) const {
  int dcx = 0, dcy = 0, roll_dir = -1;
  switch (m) {
    case kPushN: dcx = -1; break;
    case kPushS: dcx = 1; break;
    case kPushE: dcy = 1; break;
    case kPushW: dcy = -1; break;
    case kRollN: dcx = -1; roll_dir = 0; break;
    case kRollS: dcx = 1; roll_dir = 1; break;
    case kRollE: dcy = 1; roll_dir = 2; break;
    case kRollW: dcy = -1; roll_dir = 3; break;
  }
  const int nx = s.cx + dcx;
  const int ny = s.cy + dcy;
  if (nx < 0 || nx >= params_.cells || ny < 0 || ny >= params_.cells) {
    return s;  // blocked at the border, rolls included
  }
  CubeState n = s;
  n.cx = nx;
  n.cy = ny;
  if (roll_dir >= 0) n.orient = roll_orient(s.orient, roll_dir);
  return n;
}

CubeState CubeEnv::step_state(const CubeState& s, const ActionVec& a) const {
  Move m;
  if (!decode_action(a, m)) return s;
  return apply_move(s, m);
}

Observation CubeEnv::render(const CubeState& s) const {
  Observation obs;
  obs.dims = obs_dims();
  obs.data.assign(static_cast<size_t>(obs.dims.size()), 0);
  const int px = params_.image_side / params_.cells;
  const int top = top_face(s.orient);
  const int north = north_face(s.orient);
  const int r0 = s.cx * px, c0 = s.cy * px;
  const int strip = std::max(1, px / 4);  // north-face strip disambiguates orientation
  for (int r = 0; r < px; ++r) {
    for (int c = 0; c < px; ++c) {
      const int face = (r < strip) ? north : top;
      uint8_t* p = obs.data.data() +
                   (static_cast<int64_t>(r0 + r) * params_.image_side + (c0 + c)) * 3;
      p[0] = kFaceRgb[face][0];
      p[1] = kFaceRgb[face][1];
      p[2] = kFaceRgb[face][2];
    }
  }
  return obs;
}

int64_t CubeEnv::state_to_id(const CubeState& s) const {
  return (static_cast<int64_t>(s.cx) * params_.cells + s.cy) * kOrientations + s.orient;
}

void CubeEnv::reset(Observation& obs, Sidecar& sc) {
  state_ = initial_state();
  obs = render(state_);
  sc = to_sidecar(state_);
}

void CubeEnv::step(const ActionVec& a, Observation& obs, Sidecar& sc) {
  state_ = step_state(state_, a);
  obs = render(state_);
  sc = to_sidecar(state_);
}

int64_t CubeEnv::state_id(const Sidecar& sc) const { return state_to_id(from_sidecar(sc)); }

Sidecar CubeEnv::to_sidecar(const CubeState& s) {
  return {static_cast<float>(s.cx), static_cast<float>(s.cy), static_cast<float>(s.orient)};
}

CubeState CubeEnv::from_sidecar(const Sidecar& sc) {
  return CubeState{static_cast<int>(sc[0]), static_cast<int>(sc[1]), static_cast<int>(sc[2])};
}

}  // namespace goalex
