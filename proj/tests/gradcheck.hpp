#pragma once

// Central-difference gradient oracle used by the layer and loss tests.
// Independent of the backward-pass implementations it checks: it only ever
// calls the forward path.

#include <cmath>
#include <functional>

#include "lns/core/tensor.hpp"

namespace lns::test {

// d/dx_i of a scalar-valued function, evaluated for every element of x.
inline Tensor<double> numeric_grad(
    const std::function<double(const Tensor<double>&)>& f, Tensor<double> x,
    double h = 1e-4) {
  Tensor<double> g(x.shape);
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    const double orig = x.data[i];
    x.data[i] = orig + h;
    const double fp = f(x);
    x.data[i] = orig - h;
    const double fm = f(x);
    x.data[i] = orig;
    g.data[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  double m = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace lns::test
