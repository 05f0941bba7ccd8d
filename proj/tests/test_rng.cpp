#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "lns/core/rng.hpp"
#include "lns/core/tensor.hpp"

using lns::Rng;
using lns::Tensor;

TEST_CASE("same seed gives identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

  Rng c(42);
  Rng d(42);
  auto t1 = lns::gaussian_sample<float>(c, {3, 5, 5}, 0.0, 1.0);
  auto t2 = lns::gaussian_sample<float>(d, {3, 5, 5}, 0.0, 1.0);
  REQUIRE(t1.data == t2.data);
}

TEST_CASE("different seeds and streams diverge") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  REQUIRE(same == 0);

  Rng base(7);
  Rng s1 = base.stream("weights");
  Rng s2 = base.stream("noise");
  REQUIRE(s1.next_u64() != s2.next_u64());

  // Numbered variants of a named stream are themselves independent.
  Rng p0 = base.stream("batch", 0);
  Rng p1 = base.stream("batch", 1);
  REQUIRE(p0.next_u64() != p1.next_u64());
}

TEST_CASE("std=0 collapses to the mean") {
  Rng r(3);
  auto t = lns::gaussian_sample<double>(r, {100}, 1.25, 0.0);
  for (double v : t.data) REQUIRE(v == 1.25);
}

TEST_CASE("negative std rejected") {
  Rng r(3);
  REQUIRE_THROWS_AS(lns::gaussian_sample<double>(r, {4}, 0.0, -1.0),
                    std::invalid_argument);
}

TEST_CASE("normal sample moments at 1e6 draws") {
  Rng r(123);
  const int n = 1'000'000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = r.normal(0.0, 1.0);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  REQUIRE(mean > -0.01);
  REQUIRE(mean < 0.01);
  REQUIRE(var > 0.99);
  REQUIRE(var < 1.01);
}

TEST_CASE("uniform covers its interval") {
  Rng r(9);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double v = r.uniform(0.1, 1.0);
    REQUIRE(v >= 0.1);
    REQUIRE(v < 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  REQUIRE(lo < 0.12);
  REQUIRE(hi > 0.98);
}

TEST_CASE("next_below stays in range and hits all buckets") {
  Rng r(11);
  int counts[7] = {0};
  for (int i = 0; i < 7000; ++i) counts[r.next_below(7)]++;
  for (int c : counts) REQUIRE(c > 800);
}

TEST_CASE("tensor reshape and finiteness checks") {
  Tensor<float> t({2, 3});
  REQUIRE(t.numel() == 6);
  auto r = t.reshaped({3, 2});
  REQUIRE(r.dim(0) == 3);
  REQUIRE_THROWS_AS(t.reshaped({4, 2}), std::invalid_argument);
  REQUIRE(t.all_finite());
  t.data[3] = std::numeric_limits<float>::quiet_NaN();
  REQUIRE(!t.all_finite());
}
