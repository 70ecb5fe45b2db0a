#pragma once

// Test-only reference implementations, independent of the library's compute
// path (plain loops, double precision, no Eigen).

#include <array>
#include <vector>

#include "goalex/env_cube.hpp"
#include "goalex/nn.hpp"

namespace oracles {

// Straight-line float64 forward pass reading the network's parameters.
// relu_mask, when given, records the sign pattern of every relu unit.
std::vector<double> ref_forward(const goalex::Network& net, const std::vector<float>& x,
                                const std::vector<float>& aux,
                                std::vector<uint8_t>* relu_mask = nullptr);

// Central finite difference of sum(w . output) with respect to one scalar.
// stable is false when the perturbation crossed a relu kink, where the
// two-sided difference does not estimate the one-sided derivative.
struct FdResult {
  bool stable = true;
  double value = 0.0;
};
FdResult fd_param_grad(goalex::Network& net, int layer, bool bias, int64_t index,
                       const std::vector<float>& x, const std::vector<float>& aux,
                       const std::vector<double>& out_weights, double eps);
FdResult fd_input_grad(const goalex::Network& net, std::vector<float> x,
                       const std::vector<float>& aux, int64_t index,
                       const std::vector<double>& out_weights, double eps);
FdResult fd_aux_grad(const goalex::Network& net, const std::vector<float>& x,
                     std::vector<float> aux, int64_t index,
                     const std::vector<double>& out_weights, double eps);

// 24-element rotation group built from integer rotation matrices acting on
// face-normal vectors; independent of the cube environment's tables.
class RotationOracle {
 public:
  RotationOracle();  // starts at the canonical yellow-up orientation
  void roll(int dir);  // 0=N 1=S 2=E 3=W
  int top_face() const;
  int north_face() const;
  int east_face() const;

 private:
  // Rows are world axes (x=east, y=north, z=up); columns body axes.
  std::array<std::array<int, 3>, 3> rot_;
};

}  // namespace oracles
