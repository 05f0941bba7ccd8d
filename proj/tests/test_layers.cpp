#include <catch2/catch_amalgamated.hpp>

#include "gradcheck.hpp"
#include "lns/core/layers.hpp"
#include "lns/core/rng.hpp"

using namespace lns;

namespace {

Tensor<double> randu(Rng& rng, std::vector<std::int64_t> shape, double lo = -1,
                     double hi = 1) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

// Scalar probe: sum(w_out .* f(x)) with fixed random w_out, so the upstream
// gradient for the backward pass is just w_out.
template <typename F>
double probe(const F& f, const Tensor<double>& weights) {
  Tensor<double> y = f();
  double s = 0;
  for (std::int64_t i = 0; i < y.numel(); ++i) s += y.data[i] * weights.data[i];
  return s;
}

}  // namespace

TEST_CASE("conv2d single full-size window equals dot product") {
  Rng rng(1);
  auto x = randu(rng, {1, 1, 4, 4});
  auto w = randu(rng, {1, 1, 4, 4});
  Tensor<double> b({1});
  auto y = conv2d_forward(x, w, b, 1, 0);
  REQUIRE(y.shape == std::vector<std::int64_t>{1, 1, 1, 1});
  double dot = 0;
  for (int i = 0; i < 16; ++i) dot += x.data[i] * w.data[i];
  REQUIRE_THAT(y.data[0], Catch::Matchers::WithinAbs(dot, 1e-12));
}

TEST_CASE("conv2d identity kernel reproduces the input") {
  Rng rng(2);
  auto x = randu(rng, {2, 1, 6, 6});
  Tensor<double> w({1, 1, 3, 3});
  w.data[4] = 1.0;  // delta at kernel center
  Tensor<double> b({1});
  auto y = conv2d_forward(x, w, b, 1, 1);
  REQUIRE(y.shape == x.shape);
  for (std::int64_t i = 0; i < x.numel(); ++i)
    REQUIRE_THAT(y.data[i], Catch::Matchers::WithinAbs(x.data[i], 1e-14));
}

TEST_CASE("conv2d shape errors name the layer") {
  Tensor<double> x({1, 3, 8, 8}), w({4, 2, 3, 3}), b({4});
  REQUIRE_THROWS_WITH(conv2d_forward(x, w, b, 1, 1, "enc.conv1"),
                      Catch::Matchers::ContainsSubstring("enc.conv1"));
}

TEST_CASE("conv2d gradcheck vs central differences") {
  Rng rng(3);
  auto x = randu(rng, {2, 3, 8, 8});
  auto w = randu(rng, {4, 3, 3, 3}, -0.5, 0.5);
  auto b = randu(rng, {4}, -0.1, 0.1);
  const std::int64_t stride = 2, pad = 1;
  auto y0 = conv2d_forward(x, w, b, stride, pad);
  auto up = randu(rng, y0.shape);

  auto g = conv2d_backward(x, w, up, stride, pad);

  auto fx = [&](const Tensor<double>& xv) {
    return probe([&] { return conv2d_forward(xv, w, b, stride, pad); }, up);
  };
  auto fw = [&](const Tensor<double>& wv) {
    return probe([&] { return conv2d_forward(x, wv, b, stride, pad); }, up);
  };
  auto fb = [&](const Tensor<double>& bv) {
    return probe([&] { return conv2d_forward(x, w, bv, stride, pad); }, up);
  };
  REQUIRE(test::max_abs_diff(g.dx, test::numeric_grad(fx, x)) < 1e-6);
  REQUIRE(test::max_abs_diff(g.dw, test::numeric_grad(fw, w)) < 1e-6);
  REQUIRE(test::max_abs_diff(g.db, test::numeric_grad(fb, b)) < 1e-6);
}

TEST_CASE("conv_transpose2d inverts the encoder shape chain") {
  // Spatial chain of the encoder stack: 64 ->64 ->32 ->16 ->8 ->4 ->1.
  struct Step {
    std::int64_t k, s, p;
  };
  const Step steps[] = {{3, 1, 1}, {4, 2, 1}, {4, 2, 1}, {4, 2, 1}, {4, 2, 1}, {4, 1, 0}};
  std::int64_t d = 64;
  std::vector<std::int64_t> fwd{d};
  for (auto st : steps) {
    d = conv_out_dim(d, st.k, st.s, st.p);
    fwd.push_back(d);
  }
  REQUIRE(fwd == std::vector<std::int64_t>{64, 64, 32, 16, 8, 4, 1});
  for (int i = 5; i >= 0; --i) {
    d = conv_transpose_out_dim(d, steps[i].k, steps[i].s, steps[i].p);
    REQUIRE(d == fwd[i]);
  }
}

TEST_CASE("conv_transpose2d gradcheck vs central differences") {
  Rng rng(4);
  auto x = randu(rng, {2, 3, 4, 4});
  auto w = randu(rng, {3, 2, 4, 4}, -0.5, 0.5);
  auto b = randu(rng, {2}, -0.1, 0.1);
  const std::int64_t stride = 2, pad = 1;
  auto y0 = conv_transpose2d_forward(x, w, b, stride, pad);
  REQUIRE(y0.shape == std::vector<std::int64_t>{2, 2, 8, 8});
  auto up = randu(rng, y0.shape);

  auto g = conv_transpose2d_backward(x, w, up, stride, pad);

  auto fx = [&](const Tensor<double>& xv) {
    return probe([&] { return conv_transpose2d_forward(xv, w, b, stride, pad); }, up);
  };
  auto fw = [&](const Tensor<double>& wv) {
    return probe([&] { return conv_transpose2d_forward(x, wv, b, stride, pad); }, up);
  };
  auto fb = [&](const Tensor<double>& bv) {
    return probe([&] { return conv_transpose2d_forward(x, w, bv, stride, pad); }, up);
  };
  REQUIRE(test::max_abs_diff(g.dx, test::numeric_grad(fx, x)) < 1e-6);
  REQUIRE(test::max_abs_diff(g.dw, test::numeric_grad(fw, w)) < 1e-6);
  REQUIRE(test::max_abs_diff(g.db, test::numeric_grad(fb, b)) < 1e-6);
}

TEST_CASE("conv and transpose-conv are adjoint maps") {
  // <conv(x), y> == <x, conv_T(y)> when they share weights; catches any
  // mismatch between the two geometry conventions.
  Rng rng(5);
  auto x = randu(rng, {1, 2, 8, 8});
  auto w = randu(rng, {3, 2, 4, 4});  // conv weights [OC, C, k, k]
  Tensor<double> b0({3}), b1({2});
  auto y = conv2d_forward(x, w, b0, 2, 1);

  auto z = randu(rng, y.shape);
  // The transpose layout [Cin=3, Cout=2, k, k] has the same flat order as the
  // conv layout [OC=3, C=2, k, k], so sharing values is a straight copy.
  Tensor<double> wt({3, 2, 4, 4});
  wt.data = w.data;
  auto xt = conv_transpose2d_forward(z, wt, b1, 2, 1);
  REQUIRE(xt.shape == x.shape);

  double lhs = 0, rhs = 0;
  for (std::int64_t i = 0; i < y.numel(); ++i) lhs += y.data[i] * z.data[i];
  for (std::int64_t i = 0; i < x.numel(); ++i) rhs += x.data[i] * xt.data[i];
  REQUIRE_THAT(lhs, Catch::Matchers::WithinRel(rhs, 1e-10));
}

TEST_CASE("linear gradcheck vs central differences") {
  Rng rng(6);
  auto x = randu(rng, {5, 7});
  auto w = randu(rng, {3, 7}, -0.5, 0.5);
  auto b = randu(rng, {3}, -0.1, 0.1);
  auto up = randu(rng, {5, 3});

  auto g = linear_backward(x, w, up);

  auto fx = [&](const Tensor<double>& xv) {
    return probe([&] { return linear_forward(xv, w, b); }, up);
  };
  auto fw = [&](const Tensor<double>& wv) {
    return probe([&] { return linear_forward(x, wv, b); }, up);
  };
  auto fb = [&](const Tensor<double>& bv) {
    return probe([&] { return linear_forward(x, w, bv); }, up);
  };
  REQUIRE(test::max_abs_diff(g.dx, test::numeric_grad(fx, x)) < 1e-6);
  REQUIRE(test::max_abs_diff(g.dw, test::numeric_grad(fw, w)) < 1e-6);
  REQUIRE(test::max_abs_diff(g.db, test::numeric_grad(fb, b)) < 1e-6);
}

TEST_CASE("relu basics and gradient convention at zero") {
  Tensor<double> x({3});
  x.data = {-1.0, 0.0, 2.0};
  auto y = relu_forward(x);
  REQUIRE(y.data == std::vector<double>{0.0, 0.0, 2.0});
  Tensor<double> up({3});
  up.data = {1.0, 1.0, 1.0};
  auto dx = relu_backward(x, up);
  REQUIRE(dx.data == std::vector<double>{0.0, 0.0, 1.0});
}

TEST_CASE("sigmoid gradcheck") {
  Rng rng(7);
  auto x = randu(rng, {4, 4}, -3, 3);
  auto up = randu(rng, {4, 4});
  auto y = sigmoid_forward(x);
  auto dx = sigmoid_backward(y, up);
  auto f = [&](const Tensor<double>& xv) {
    return probe([&] { return sigmoid_forward(xv); }, up);
  };
  REQUIRE(test::max_abs_diff(dx, test::numeric_grad(f, x)) < 1e-8);
}

TEST_CASE("random stride-1 conv gradcheck with kernel 3 pad 1") {
  Rng rng(8);
  auto x = randu(rng, {1, 2, 5, 5});
  auto w = randu(rng, {2, 2, 3, 3}, -0.5, 0.5);
  auto b = randu(rng, {2});
  auto up = randu(rng, {1, 2, 5, 5});
  auto g = conv2d_backward(x, w, up, 1, 1);
  auto fx = [&](const Tensor<double>& xv) {
    return probe([&] { return conv2d_forward(xv, w, b, 1, 1); }, up);
  };
  REQUIRE(test::max_abs_diff(g.dx, test::numeric_grad(fx, x)) < 1e-6);
}
