#include <doctest.h>

#include <deque>
#include <set>
#include <unordered_set>

#include "goalex/env_cube.hpp"
#include "goalex/env_grid.hpp"
#include "goalex/rng.hpp"
#include "oracles.hpp"

using namespace goalex;

namespace {

ActionVec grid_move_x(float sign) { return {sign, 0.0f, 0.0f}; }
ActionVec grid_move_y(float sign) { return {0.0f, sign, 0.0f}; }
ActionVec grid_rot(float sign) { return {0.0f, 0.0f, sign}; }

}  // namespace

TEST_CASE("grid reset returns the center state deterministically") {
  GridEnv env;
  Observation o1, o2;
  Sidecar s1, s2;
  env.reset(o1, s1);
  CHECK(env.state().x == 42);
  CHECK(env.state().y == 42);
  CHECK(env.state().rot == 0);
  env.step(grid_move_x(1.0f), o2, s2);
  env.reset(o2, s2);
  CHECK(o1 == o2);  // bit-exact
  CHECK(s1 == s2);
}

TEST_CASE("grid render: reset image has exactly the sprite's pixel count white") {
  GridEnv env;
  const Observation obs = env.render(env.initial_state());
  int white = 0;
  for (uint8_t v : obs.data) {
    CHECK((v == 0 || v == 255));
    if (v == 255) ++white;
  }
  CHECK(white == env.sprite_pixel_count());
  // 13x9 rectangle minus the 4x3 notch.
  CHECK(env.sprite_pixel_count() == 13 * 9 - 4 * 3);
}

TEST_CASE("grid render is a pure function of state") {
  GridEnv env;
  const GridState s{17, 60, 5};
  CHECK(env.render(s) == env.render(s));
}

TEST_CASE("all 12 sprite rotations render distinctly") {
  GridEnv env;
  std::vector<Observation> renders;
  for (int r = 0; r < 12; ++r) renders.push_back(env.render(GridState{42, 42, r}));
  for (int a = 0; a < 12; ++a) {
    for (int b = a + 1; b < 12; ++b) CHECK_FALSE(renders[a] == renders[b]);
  }
}

TEST_CASE("grid step moves exactly one unit along the argmax axis") {
  GridEnv env;
  const GridState s{10, 10, 0};
  const GridState sx = env.step_state(s, {0.9f, -0.2f, 0.1f});
  CHECK(sx.x == 11);
  CHECK(sx.y == 10);
  CHECK(sx.rot == 0);
  const GridState sy = env.step_state(s, {0.1f, -0.8f, 0.3f});
  CHECK(sy.y == 9);
  const GridState sr = env.step_state(s, {0.1f, -0.2f, 0.9f});
  CHECK(sr.rot == 1);
}

TEST_CASE("12 rotations return to the start") {
  GridEnv env;
  GridState s{40, 40, 3};
  for (int i = 0; i < 12; ++i) s = env.step_state(s, grid_rot(1.0f));
  CHECK(s.rot == 3);
  for (int i = 0; i < 12; ++i) s = env.step_state(s, grid_rot(-1.0f));
  CHECK(s.rot == 3);
}

TEST_CASE("grid positions saturate at the borders") {
  GridEnv env;
  const GridState right = env.step_state(GridState{83, 40, 3}, grid_move_x(1.0f));
  CHECK(right.x == 83);
  CHECK(right.y == 40);
  CHECK(right.rot == 3);
  const GridState top = env.step_state(GridState{0, 0, 0}, grid_move_y(-1.0f));
  CHECK(top.y == 0);
}

TEST_CASE("grid state ids form the canonical bijection") {
  GridEnv env;
  CHECK(env.state_to_id(GridState{0, 0, 0}) == 0);
  CHECK(env.state_to_id(GridState{83, 83, 11}) == 84672 - 1);
  CHECK(env.state_space_size() == 84672);

  Rng rng(3);
  std::unordered_set<int64_t> seen;
  for (int i = 0; i < 10000; ++i) {
    GridState s{static_cast<int>(rng.uniform_int(84)), static_cast<int>(rng.uniform_int(84)),
                static_cast<int>(rng.uniform_int(12))};
    const int64_t id = env.state_to_id(s);
    CHECK(id >= 0);
    CHECK(id < env.state_space_size());
    seen.insert(id);
    const GridState back = env.id_to_state(id);
    CHECK(back.x == s.x);
    CHECK(back.y == s.y);
    CHECK(back.rot == s.rot);
  }
  CHECK(seen.size() > 5000);  // injectivity over the sampled states
}

TEST_CASE("grid dynamics reach every state from the center (BFS oracle)") {
  GridEnv env;
  const int64_t total = env.state_space_size();
  std::vector<uint8_t> visited(static_cast<size_t>(total), 0);
  std::deque<GridState> queue{env.initial_state()};
  visited[static_cast<size_t>(env.state_to_id(env.initial_state()))] = 1;
  int64_t count = 1;
  const ActionVec moves[6] = {grid_move_x(1),  grid_move_x(-1), grid_move_y(1),
                              grid_move_y(-1), grid_rot(1),     grid_rot(-1)};
  while (!queue.empty()) {
    const GridState s = queue.front();
    queue.pop_front();
    for (const auto& a : moves) {
      const GridState n = env.step_state(s, a);
      const auto id = static_cast<size_t>(env.state_to_id(n));
      if (!visited[id]) {
        visited[id] = 1;
        ++count;
        queue.push_back(n);
      }
    }
  }
  CHECK(count == total);
}

// ----------------------------------------------------------------- cube

TEST_CASE("cube reset: yellow up at the configured cell") {
  CubeEnv env;
  Observation obs;
  Sidecar sc;
  env.reset(obs, sc);
  CHECK(env.state().cx == 5);
  CHECK(env.state().cy == 2);
  CHECK(env.top_face(env.state().orient) == kFaceYellow);
  Observation obs2;
  Sidecar sc2;
  env.reset(obs2, sc2);
  CHECK(obs == obs2);

  CubeParams p;
  p.reset_cx = 7;
  p.reset_cy = 4;
  CubeEnv custom(p);
  CHECK(custom.initial_state().cx == 7);
  CHECK(custom.initial_state().cy == 4);
}

TEST_CASE("push moves the cell and keeps the orientation") {
  CubeEnv env;
  const CubeState s{5, 5, 7};
  const CubeState e = env.apply_move(s, CubeEnv::kPushE);
  CHECK(e.cy == 6);
  CHECK(e.cx == 5);
  CHECK(e.orient == 7);
  CHECK(env.top_face(e.orient) == env.top_face(s.orient));
}

TEST_CASE("roll four times in one direction returns the orientation") {
  CubeEnv env;
  for (int orient = 0; orient < CubeEnv::kOrientations; ++orient) {
    for (int dir = 0; dir < 4; ++dir) {
      int o = orient;
      for (int i = 0; i < 4; ++i) o = env.roll_orient(o, dir);
      CHECK(o == orient);
    }
  }
  // With room to move, four rolls north also displace four rows.
  CubeState s{6, 6, 0};
  for (int i = 0; i < 4; ++i) s = env.apply_move(s, CubeEnv::kRollN);
  CHECK(s.cx == 2);
  CHECK(s.orient == 0);
}

TEST_CASE("roll east from canonical orientation lifts the west face on top") {
  CubeEnv env;
  const int west_face = 5 - env.east_face(0);  // opposite faces sum to 5
  const int o = env.roll_orient(0, 2);
  CHECK(env.top_face(o) == west_face);
}

TEST_CASE("cube rolling dynamics match the rotation-matrix oracle on all cases") {
  CubeEnv env;
  // Walk the whole group in lockstep with the oracle: BFS over (orient,
  // oracle state) pairs covers all 24 x 4 roll cases.
  struct Node {
    int orient;
    oracles::RotationOracle oracle;
  };
  std::deque<Node> queue{{0, oracles::RotationOracle{}}};
  std::set<int> visited{0};
  int edges = 0;
  while (!queue.empty()) {
    Node n = queue.front();
    queue.pop_front();
    CHECK(env.top_face(n.orient) == n.oracle.top_face());
    CHECK(env.north_face(n.orient) == n.oracle.north_face());
    CHECK(env.east_face(n.orient) == n.oracle.east_face());
    for (int dir = 0; dir < 4; ++dir) {
      Node next = n;
      next.orient = env.roll_orient(n.orient, dir);
      next.oracle.roll(dir);
      CHECK(env.top_face(next.orient) == next.oracle.top_face());
      CHECK(env.north_face(next.orient) == next.oracle.north_face());
      CHECK(env.east_face(next.orient) == next.oracle.east_face());
      ++edges;
      if (visited.insert(next.orient).second) queue.push_back(next);
    }
  }
  CHECK(visited.size() == 24);
  CHECK(edges == 24 * 4);
}

TEST_CASE("opposite faces always sum to five") {
  CubeEnv env;
  for (int o = 0; o < CubeEnv::kOrientations; ++o) {
    const int top = env.top_face(o);
    const int north = env.north_face(o);
    const int east = env.east_face(o);
    const int south = 5 - north;
    const int west = 5 - east;
    int bottom = -1;
    for (int f = 0; f < 6; ++f) {
      if (f != top && f != north && f != east && f != south && f != west) bottom = f;
    }
    CHECK(top + bottom == 5);
  }
}

TEST_CASE("rolls into the border are in-place no-ops") {
  CubeEnv env;
  const CubeState corner{0, 0, 3};
  const CubeState n = env.apply_move(corner, CubeEnv::kRollN);
  CHECK(n.cx == 0);
  CHECK(n.cy == 0);
  CHECK(n.orient == 3);  // orientation unchanged when blocked
  const CubeState w = env.apply_move(corner, CubeEnv::kPushW);
  CHECK(w.cy == 0);
}

TEST_CASE("soft actions below the contact threshold leave the cube untouched") {
  CubeParams p;
  p.contact = 0.9f;
  CubeEnv env(p);
  const CubeState s{5, 5, 2};
  const CubeState after = env.step_state(s, {0.5f, 0.3f, 1.0f});
  CHECK(after.cx == s.cx);
  CHECK(after.cy == s.cy);
  CHECK(after.orient == s.orient);
  const CubeState moved = env.step_state(s, {0.95f, 0.3f, -1.0f});
  CHECK(moved.cx == 6);
}

TEST_CASE("action decoding matches the documented axis/sign/roll rule") {
  CubeEnv env;
  CubeEnv::Move m;
  CHECK(env.decode_action({1.0f, 0.0f, -1.0f}, m));
  CHECK(m == CubeEnv::kPushS);
  CHECK(env.decode_action({-1.0f, 0.2f, 1.0f}, m));
  CHECK(m == CubeEnv::kRollN);
  CHECK(env.decode_action({0.1f, -1.0f, 1.0f}, m));
  CHECK(m == CubeEnv::kRollW);
  CHECK(env.decode_action({0.2f, 0.95f, -0.5f}, m));
  CHECK(m == CubeEnv::kPushE);
  // Every synthesized decisive action decodes back to its move.
  for (int mi = 0; mi < CubeEnv::kMoveCount; ++mi) {
    const auto a = CubeEnv::move_to_action(static_cast<CubeEnv::Move>(mi));
    CubeEnv::Move back;
    CHECK(env.decode_action(a, back));
    CHECK(back == static_cast<CubeEnv::Move>(mi));
  }
}

TEST_CASE("cube state ids are a bijection over the 3456 states") {
  CubeEnv env;
  CHECK(env.state_space_size() == 12 * 12 * 24);
  std::unordered_set<int64_t> ids;
  for (int cx = 0; cx < 12; ++cx) {
    for (int cy = 0; cy < 12; ++cy) {
      for (int o = 0; o < 24; ++o) {
        const int64_t id = env.state_to_id(CubeState{cx, cy, o});
        CHECK(id >= 0);
        CHECK(id < env.state_space_size());
        ids.insert(id);
      }
    }
  }
  CHECK(ids.size() == static_cast<size_t>(env.state_space_size()));
}

TEST_CASE("cube render is deterministic and orientation-revealing") {
  CubeEnv env;
  const CubeState a{3, 4, 0};
  CHECK(env.render(a) == env.render(a));
  // Same cell and top color can still differ through the north strip.
  int o2 = -1;
  for (int o = 1; o < 24; ++o) {
    if (env.top_face(o) == env.top_face(0) && env.north_face(o) != env.north_face(0)) {
      o2 = o;
      break;
    }
  }
  REQUIRE(o2 >= 0);
  CHECK_FALSE(env.render(a) == env.render(CubeState{3, 4, o2}));
}

TEST_CASE("position in cm is the cell index times the cell size") {
  CubeEnv env;
  CHECK(env.cell_to_cm(0) == 0.0f);
  CHECK(env.cell_to_cm(6) == doctest::Approx(18.0f));
  CHECK(env.cell_to_cm(11) == doctest::Approx(33.0f));
}
