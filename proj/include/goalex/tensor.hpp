#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace goalex {

// Raised on malformed shapes, incompatible specs, bad config values.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by the debug-mode finite checks.
class NumericsError : public std::runtime_error {
 public:
  explicit NumericsError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dense row-major float32 tensor. Image batches use NHWC layout.
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);
  Tensor(std::vector<int> s, float fill);

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor scalar(float v) { return Tensor({1}, v); }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  std::string shape_str() const;

  float* ptr() { return data.data(); }
  const float* ptr() const { return data.data(); }
};

int64_t shape_numel(const std::vector<int>& shape);
bool contains_nonfinite(const float* p, int64_t n);

// Toggles the finite checks run after forward/backward passes.
void set_debug_checks(bool on);
bool debug_checks_enabled();
void check_finite(const Tensor& t, const char* what);

struct MseResult {
  float loss = 0.0f;
  Tensor grad;  // d(loss)/d(pred)
};

// Mean squared error over all elements (mean convention).
MseResult mse_loss(const Tensor& pred, const Tensor& target);
float mse_value(const Tensor& pred, const Tensor& target);

}  // namespace goalex
