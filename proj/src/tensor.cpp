#include "goalex/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace goalex {

int64_t shape_numel(const std::vector<int>& shape) {
  if (shape.empty()) return 0;
  int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ConfigError("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)), data(shape_numel(shape), 0.0f) {}

Tensor::Tensor(std::vector<int> s, float fill)
    : shape(std::move(s)), data(shape_numel(shape), fill) {}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << "]";
  return os.str();
}

bool contains_nonfinite(const float* p, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) return true;
  }
  return false;
}

namespace {
std::atomic<bool> g_debug_checks{true};
}

void set_debug_checks(bool on) { g_debug_checks.store(on); }
bool debug_checks_enabled() { return g_debug_checks.load(); }

void check_finite(const Tensor& t, const char* what) {
  if (!debug_checks_enabled()) return;
  if (contains_nonfinite(t.ptr(), t.numel())) {
    throw NumericsError(std::string("non-finite values in ") + what);
  }
}

MseResult mse_loss(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target)) {
    throw ConfigError("mse_loss: shape mismatch " + pred.shape_str() + " vs " +
                      target.shape_str());
  }
  MseResult r;
  r.grad = Tensor(pred.shape);
  const int64_t n = pred.numel();
  double acc = 0.0;
  const float inv_n = 1.0f / static_cast<float>(n);
  for (int64_t i = 0; i < n; ++i) {
    const float d = pred.data[i] - target.data[i];
    acc += static_cast<double>(d) * static_cast<double>(d);
    r.grad.data[i] = 2.0f * d * inv_n;
  }
  r.loss = static_cast<float>(acc / static_cast<double>(n));
  return r;
}

float mse_value(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target)) {
    throw ConfigError("mse_value: shape mismatch");
  }
  double acc = 0.0;
  for (int64_t i = 0; i < pred.numel(); ++i) {
    const float d = pred.data[i] - target.data[i];
    acc += static_cast<double>(d) * static_cast<double>(d);
  }
  return static_cast<float>(acc / static_cast<double>(pred.numel()));
}

}  // namespace goalex
