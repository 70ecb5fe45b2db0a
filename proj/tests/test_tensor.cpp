#include <doctest.h>

#include "goalex/adam.hpp"
#include "goalex/rng.hpp"
#include "goalex/tensor.hpp"

using namespace goalex;

TEST_CASE("tensor shape bookkeeping") {
  Tensor t({2, 3, 4});
  CHECK(t.numel() == 24);
  CHECK(t.shape_str() == "[2x3x4]");
  CHECK_THROWS_AS(Tensor({2, 0}), ConfigError);
}

TEST_CASE("mse: equal tensors give zero") {
  Tensor a({3}, 1.5f);
  CHECK(mse_loss(a, a).loss == 0.0f);
}

TEST_CASE("mse: hand arithmetic, mean convention") {
  Tensor pred({2}, 1.0f);
  Tensor target({2}, 0.0f);
  const auto r = mse_loss(pred, target);
  CHECK(r.loss == doctest::Approx(1.0));
  // grad = 2*(pred-target)/n
  CHECK(r.grad.data[0] == doctest::Approx(1.0));
  CHECK(r.grad.data[1] == doctest::Approx(1.0));
}

TEST_CASE("mse: random pair matches scalar-loop oracle") {
  Rng rng(77);
  Tensor a({17}), b({17});
  for (auto& v : a.data) v = rng.uniform_float(-2.0f, 2.0f);
  for (auto& v : b.data) v = rng.uniform_float(-2.0f, 2.0f);
  double acc = 0.0;
  for (int i = 0; i < 17; ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    acc += d * d;
  }
  CHECK(mse_loss(a, b).loss == doctest::Approx(acc / 17.0).epsilon(1e-6));
  CHECK_THROWS_AS(mse_loss(a, Tensor({3})), ConfigError);
}

TEST_CASE("mse loss is nonnegative and zero only at equality") {
  Rng rng(5);
  Tensor a({9}), b({9});
  for (int trial = 0; trial < 50; ++trial) {
    for (auto& v : a.data) v = rng.uniform_float(-1.0f, 1.0f);
    b.data = a.data;
    const int idx = static_cast<int>(rng.uniform_int(9));
    b.data[idx] += 0.25f;
    CHECK(mse_loss(a, b).loss > 0.0f);
    CHECK(mse_loss(a, a).loss == 0.0f);
  }
}

TEST_CASE("adam: zero gradient leaves fresh parameters unchanged") {
  Tensor p({4}, 0.7f);
  Tensor g({4}, 0.0f);
  AdamState st = AdamState::like({&p}, 0.1f);
  adam_step({&p}, {&g}, st);
  CHECK(st.step == 1);
  for (float v : p.data) CHECK(v == 0.7f);
}

TEST_CASE("adam: first step with unit gradient moves by about -lr") {
  // Bias-corrected first step: m_hat = g, v_hat = g^2, delta = -lr*g/(|g|+eps).
  Tensor p({1}, 0.0f);
  Tensor g({1}, 1.0f);
  AdamState st = AdamState::like({&p}, 0.1f);
  adam_step({&p}, {&g}, st);
  CHECK(p.data[0] == doctest::Approx(-0.1).epsilon(1e-5));
}

TEST_CASE("adam: repeated constant gradient moves monotonically against it") {
  Tensor p({1}, 0.5f);
  Tensor g({1}, 2.0f);
  AdamState st = AdamState::like({&p}, 0.01f);
  float prev = p.data[0];
  for (int i = 0; i < 25; ++i) {
    adam_step({&p}, {&g}, st);
    CHECK(p.data[0] < prev);
    prev = p.data[0];
  }
}

TEST_CASE("adam: shape mismatch rejected") {
  Tensor p({2});
  Tensor g({3});
  AdamState st = AdamState::like({&p}, 0.1f);
  CHECK_THROWS_AS(adam_step({&p}, {&g}, st), ConfigError);
}

TEST_CASE("debug finite checks catch bad values") {
  set_debug_checks(true);
  Tensor t({2}, 1.0f);
  CHECK_NOTHROW(check_finite(t, "test"));
  t.data[1] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(check_finite(t, "test"), NumericsError);
  set_debug_checks(false);
  CHECK_NOTHROW(check_finite(t, "test"));
  set_debug_checks(true);
}

TEST_CASE("rng: named substreams are independent and reproducible") {
  RngPool pool(42);
  Rng a1 = pool.stream("alpha");
  Rng a2 = pool.stream("alpha");
  Rng b = pool.stream("beta");
  CHECK(a1.next_u64() == a2.next_u64());
  Rng a3 = pool.stream("alpha");
  CHECK(a3.next_u64() != b.next_u64());
}

TEST_CASE("rng: sample without replacement is distinct and in range") {
  Rng rng(9);
  const auto s = rng.sample_without_replacement(100, 30);
  CHECK(s.size() == 30);
  for (size_t i = 1; i < s.size(); ++i) CHECK(s[i] > s[i - 1]);
  for (auto v : s) {
    CHECK(v >= 0);
    CHECK(v < 100);
  }
  CHECK(rng.sample_without_replacement(10, 20).size() == 10);
}
