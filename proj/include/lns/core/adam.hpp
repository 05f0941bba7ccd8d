#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lns/core/tensor.hpp"

namespace lns {

/// Adam with bias correction over a flat list of parameter tensors.
/// Moment slots are index-aligned with the parameter list handed to step().
template <typename T>
struct AdamState {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step_count = 0;
  std::vector<Tensor<T>> m, v;

  static AdamState init(const std::vector<Tensor<T>*>& params, double lr_ = 5e-5,
                        double beta1_ = 0.9, double beta2_ = 0.999,
                        double eps_ = 1e-8) {
    if (lr_ <= 0) throw std::invalid_argument("adam: lr must be > 0");
    AdamState s;
    s.lr = lr_;
    s.beta1 = beta1_;
    s.beta2 = beta2_;
    s.eps = eps_;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (auto* p : params) {
      s.m.push_back(Tensor<T>(p->shape));
      s.v.push_back(Tensor<T>(p->shape));
    }
    return s;
  }
};

template <typename T>
void adam_step(std::vector<Tensor<T>*>& params,
               const std::vector<Tensor<T>*>& grads, AdamState<T>& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam: parameter/gradient/state count mismatch");
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = *params[i];
    const Tensor<T>& g = *grads[i];
    if (!p.same_shape(g) || !p.same_shape(state.m[i]))
      throw std::invalid_argument("adam: shape mismatch at parameter " +
                                  std::to_string(i));
    if (!g.all_finite())
      throw std::runtime_error("adam: non-finite gradient at parameter " +
                               std::to_string(i) + " (step " +
                               std::to_string(state.step_count) + ")");
    T* pp = p.ptr();
    const T* gp = g.ptr();
    T* mp = state.m[i].ptr();
    T* vp = state.v[i].ptr();
    const std::int64_t n = p.numel();
    for (std::int64_t j = 0; j < n; ++j) {
      const double gj = double(gp[j]);
      const double mj = state.beta1 * double(mp[j]) + (1.0 - state.beta1) * gj;
      const double vj = state.beta2 * double(vp[j]) + (1.0 - state.beta2) * gj * gj;
      mp[j] = T(mj);
      vp[j] = T(vj);
      pp[j] = T(double(pp[j]) -
                state.lr * (mj / bc1) / (std::sqrt(vj / bc2) + state.eps));
    }
  }
}

}  // namespace lns
