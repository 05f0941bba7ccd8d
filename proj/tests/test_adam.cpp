#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "lns/core/adam.hpp"

using namespace lns;

TEST_CASE("zero gradient leaves parameters unchanged") {
  Tensor<double> p({4});
  p.data = {1.0, -2.0, 3.0, 0.5};
  auto before = p.data;
  Tensor<double> g({4});
  std::vector<Tensor<double>*> params{&p}, grads{&g};
  auto st = AdamState<double>::init(params, 0.1);
  adam_step(params, grads, st);
  REQUIRE(p.data == before);
  REQUIRE(st.step_count == 1);
}

TEST_CASE("first step magnitude approaches lr for large gradients") {
  // Bias-corrected first step is lr * g / (|g| + eps); with |g| >> eps the
  // defect is lr * eps / |g|.
  Tensor<double> p({2});
  p.data = {0.0, 0.0};
  Tensor<double> g({2});
  g.data = {1e4, -1e4};
  std::vector<Tensor<double>*> params{&p}, grads{&g};
  auto st = AdamState<double>::init(params, 0.1);
  adam_step(params, grads, st);
  REQUIRE(std::abs(std::abs(p.data[0]) - 0.1) < 1e-12);
  REQUIRE(std::abs(std::abs(p.data[1]) - 0.1) < 1e-12);
  REQUIRE(p.data[0] < 0);  // descends against the gradient sign
  REQUIRE(p.data[1] > 0);
}

TEST_CASE("quadratic converges: f(w)=w^2, 200 steps at lr 0.1") {
  Tensor<double> w({1});
  w.data = {1.0};
  Tensor<double> g({1});
  std::vector<Tensor<double>*> params{&w}, grads{&g};
  auto st = AdamState<double>::init(params, 0.1);
  for (int i = 0; i < 200; ++i) {
    g.data[0] = 2.0 * w.data[0];
    adam_step(params, grads, st);
  }
  REQUIRE(std::abs(w.data[0]) < 0.05);
}

TEST_CASE("NaN gradient aborts with diagnostic") {
  Tensor<float> p({2}), g({2});
  g.data[1] = std::numeric_limits<float>::quiet_NaN();
  std::vector<Tensor<float>*> params{&p}, grads{&g};
  auto st = AdamState<float>::init(params, 0.01);
  REQUIRE_THROWS_AS(adam_step(params, grads, st), std::runtime_error);
}

TEST_CASE("shape mismatch rejected") {
  Tensor<float> p({2}), g({3});
  std::vector<Tensor<float>*> params{&p}, grads{&g};
  auto st = AdamState<float>::init(params, 0.01);
  REQUIRE_THROWS_AS(adam_step(params, grads, st), std::invalid_argument);
}

TEST_CASE("lr must be positive") {
  Tensor<float> p({1});
  std::vector<Tensor<float>*> params{&p};
  REQUIRE_THROWS_AS(AdamState<float>::init(params, 0.0), std::invalid_argument);
}
