#include <cmath>

#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace taste;
using Catch::Approx;

TEST_CASE("log_softmax reference values", "[neural]") {
  const auto z = log_softmax(Vector{0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < 3; ++i) CHECK(z[i] == Approx(-1.0986122886681098).margin(1e-12));

  const auto a = log_softmax(Vector{1.0, 2.0, 3.0});
  CHECK(a[0] == Approx(-2.4076059644443806).margin(1e-12));
  CHECK(a[1] == Approx(-1.4076059644443804).margin(1e-12));
  CHECK(a[2] == Approx(-0.4076059644443804).margin(1e-12));

  const auto big = log_softmax(Vector{1000.0, 0.0, 0.0});
  CHECK(big[0] == Approx(0.0).margin(1e-12));
  CHECK(big[1] == Approx(-1000.0).margin(1e-9));
  CHECK(std::isfinite(big[2]));
}

TEST_CASE("log_softmax rejects non-finite input", "[neural]") {
  try {
    log_softmax(Vector{1.0, std::nan(""), 0.0});
    FAIL();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numeric);
  }
}

TEST_CASE("log_softmax normalizes random vectors", "[neural]") {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + rng.below(10));
    for (auto& x : v) x = rng.uniform(-50.0, 50.0);
    const auto lp = log_softmax(std::span<const double>(v));
    double s = 0.0;
    for (double x : lp.values()) s += std::exp(x);
    REQUIRE(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("glorot_init is bounded, reproducible and centred", "[neural]") {
  const auto a = glorot_init(2, 2, 7);
  const auto b = glorot_init(2, 2, 7);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));

  const double bound = std::sqrt(6.0 / 8.0);
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto m = glorot_init(3, 5, seed);
    for (double v : m.values()) CHECK(std::abs(v) <= bound);
  }

  const auto big = glorot_init(100, 100, 1);
  double mean = 0.0;
  for (double v : big.values()) mean += v;
  mean /= static_cast<double>(big.size());
  CHECK(std::abs(mean) < 0.02);

  CHECK_THROWS_AS(glorot_init(0, 3, 1), Error);
}

TEST_CASE("Rng is portable across platforms", "[neural]") {
  // First outputs of mt19937_64 seeded with 5489 are fixed by the standard.
  Rng rng(5489);
  CHECK(rng.next() == 14514284786278117030ULL);
  Rng a(3), b(3);
  for (int i = 0; i < 100; ++i) REQUIRE(a.uniform() == b.uniform());
  for (int i = 0; i < 1000; ++i) REQUIRE(a.below(7) < 7);
}

TEST_CASE("Adagrad single step", "[neural]") {
  ParamStore store;
  store.add("p", Matrix(1, 1, 1.0));
  store[0].grad[0] = 2.0;
  adagrad_step(store, 0.1, 0.0);
  CHECK(store[0].value[0] == Approx(0.9).margin(1e-15));
  CHECK(store[0].grad[0] == 0.0);
  CHECK(store[0].accum[0] == 4.0);
}

TEST_CASE("Adagrad leaves parameters alone for zero gradients", "[neural]") {
  ParamStore store;
  store.add("w", Matrix(2, 3, 0.25));
  adagrad_step(store, 0.5, 1e-8);
  for (double v : store[0].value.values()) CHECK(v == 0.25);
}

TEST_CASE("Adagrad updates shrink as the accumulator grows", "[neural]") {
  ParamStore store;
  store.add("p", Matrix(1, 1, 0.0));
  store[0].grad[0] = 1.0;
  adagrad_step(store, 0.1, 1e-8);
  const double first = std::abs(store[0].value[0]);
  store[0].grad[0] = 1.0;
  const double before = store[0].value[0];
  adagrad_step(store, 0.1, 1e-8);
  const double second = std::abs(store[0].value[0] - before);
  CHECK(first <= 0.1);
  CHECK(second < first);
}

TEST_CASE("Adagrad names the parameter with a bad gradient and updates nothing", "[neural]") {
  ParamStore store;
  store.add("good", Matrix(1, 1, 1.0));
  store.add("bad", Matrix(1, 1, 1.0));
  store[0].grad[0] = 1.0;
  store[1].grad[0] = INFINITY;
  try {
    adagrad_step(store, 0.1, 0.0);
    FAIL();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numeric);
    CHECK_THAT(e.detail(), Catch::Matchers::ContainsSubstring("'bad'"));
  }
  CHECK(store[0].value[0] == 1.0);
}

TEST_CASE("gradient_check on closed-form losses", "[neural]") {
  ParamStore store;
  store.add("p", Matrix(1, 1, 3.0));
  auto sq = [](const ParamStore& s) { return s[0].value[0] * s[0].value[0]; };

  auto exact = gradient_check(sq, store, {Matrix(1, 1, 6.0)}, 1e-4);
  CHECK(exact.max_rel_error < 1e-6);
  CHECK(store[0].value[0] == 3.0);

  // |2g - g| / max(|2g|, |g|)
  auto doubled = gradient_check(sq, store, {Matrix(1, 1, 12.0)}, 1e-4);
  CHECK(doubled.max_rel_error == Approx(0.5).margin(1e-6));
  REQUIRE(doubled.tensors.size() == 1);
  CHECK(doubled.tensors[0].analytic == 12.0);
  CHECK(doubled.tensors[0].numeric == Approx(6.0).margin(1e-6));

  auto flat = gradient_check([](const ParamStore&) { return 1.5; }, store, {Matrix(1, 1, 0.0)}, 1e-4);
  CHECK(flat.max_rel_error < 1e-4);
}

TEST_CASE("matrix products check shapes", "[neural]") {
  Matrix m(2, 3, 1.0);
  std::vector<double> x(3, 1.0), y(2, 0.0), bad(2, 0.0);
  gemv_acc(m, x, y);
  CHECK(y == std::vector<double>{3.0, 3.0});
  try {
    gemv_acc(m, bad, y);
    FAIL();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Dimension);
  }
  std::vector<double> back(3, 0.0);
  gemv_t_acc(m, y, back);
  CHECK(back == std::vector<double>{6.0, 6.0, 6.0});
}
