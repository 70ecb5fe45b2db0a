#include "goalex/rng.hpp"

#include <algorithm>
#include <cmath>

namespace goalex {

int64_t Rng::uniform_int(int64_t n) {
  // Lemire multiply-shift; bias is negligible for the small n used here.
  return static_cast<int64_t>(
      (static_cast<__uint128_t>(next_u64()) * static_cast<__uint128_t>(n)) >> 64);
}

float Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 1e-300);
  double u2 = uniform();
  double mag = std::sqrt(-2.0 * std::log(u1));
  double two_pi_u2 = 2.0 * 3.14159265358979323846 * u2;
  spare_ = static_cast<float>(mag * std::sin(two_pi_u2));
  has_spare_ = true;
  return static_cast<float>(mag * std::cos(two_pi_u2));
}

std::vector<int64_t> Rng::sample_without_replacement(int64_t n, int64_t k) {
  if (k >= n) {
    std::vector<int64_t> all(n);
    for (int64_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  // Partial Fisher-Yates over an index array, then sort for stable order.
  std::vector<int64_t> idx(n);
  for (int64_t i = 0; i < n; ++i) idx[i] = i;
  for (int64_t i = 0; i < k; ++i) {
    int64_t j = i + uniform_int(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Rng RngPool::stream(std::string_view name) const {
  uint64_t h = fnv1a(name.data(), name.size());
  // splitmix64 over (master ^ name-hash) decorrelates nearby seeds.
  uint64_t z = master_ ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z = z ^ (z >> 31);
  return Rng(z);
}

uint64_t fnv1a(const void* data, size_t len, uint64_t basis) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = basis;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace goalex
