#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace goalex {

// Deterministic random stream. Wraps mt19937_64 (whose output sequence is
// fixed by the standard) and implements its own distributions so that draws
// are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  float uniform_float(float lo, float hi) {
    return lo + static_cast<float>(uniform()) * (hi - lo);
  }

  // Uniform integer in [0, n). n must be positive.
  int64_t uniform_int(int64_t n);

  // Standard normal via Box-Muller; the spare value is cached.
  float normal();
  float normal(float mean, float stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  // k distinct indices from [0, n), uniform, in ascending order.
  std::vector<int64_t> sample_without_replacement(int64_t n, int64_t k);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[uniform_int(i + 1)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  float spare_ = 0.0f;
};

// Derives independent named substreams from one master seed, so adding a
// consumer never perturbs the draws seen by the others.
class RngPool {
 public:
  explicit RngPool(uint64_t master_seed) : master_(master_seed) {}

  Rng stream(std::string_view name) const;
  uint64_t master_seed() const { return master_; }

 private:
  uint64_t master_;
};

uint64_t fnv1a(const void* data, size_t len, uint64_t basis = 14695981039346656037ull);

}  // namespace goalex
