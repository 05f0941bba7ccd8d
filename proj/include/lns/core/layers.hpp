#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lns/core/tensor.hpp"

namespace lns {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRM = Eigen::Map<MatRM<T>>;
template <typename T>
using CMapRM = Eigen::Map<const MatRM<T>>;

inline std::int64_t conv_out_dim(std::int64_t in, std::int64_t k,
                                 std::int64_t stride, std::int64_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

inline std::int64_t conv_transpose_out_dim(std::int64_t in, std::int64_t k,
                                           std::int64_t stride,
                                           std::int64_t pad) {
  return (in - 1) * stride - 2 * pad + k;
}

[[noreturn]] inline void shape_error(std::string_view layer,
                                     const std::string& detail) {
  throw std::invalid_argument(std::string(layer) + ": " + detail);
}

namespace detail {

// Gather one image [C,H,W] into col [C*k*k, out_h*out_w] for the window
// geometry (k, stride, pad). Out-of-bounds taps read as zero.
template <typename T>
void im2col(const T* img, std::int64_t c, std::int64_t h, std::int64_t w,
            std::int64_t k, std::int64_t stride, std::int64_t pad,
            std::int64_t out_h, std::int64_t out_w, T* col) {
  const std::int64_t plane = h * w;
  const std::int64_t ncols = out_h * out_w;
  for (std::int64_t ch = 0; ch < c; ++ch) {
    for (std::int64_t ki = 0; ki < k; ++ki) {
      for (std::int64_t kj = 0; kj < k; ++kj) {
        T* dst = col + ((ch * k + ki) * k + kj) * ncols;
        const T* src = img + ch * plane;
        for (std::int64_t oi = 0; oi < out_h; ++oi) {
          const std::int64_t ii = oi * stride - pad + ki;
          if (ii < 0 || ii >= h) {
            for (std::int64_t oj = 0; oj < out_w; ++oj) *dst++ = T(0);
            continue;
          }
          const T* row = src + ii * w;
          for (std::int64_t oj = 0; oj < out_w; ++oj) {
            const std::int64_t jj = oj * stride - pad + kj;
            *dst++ = (jj < 0 || jj >= w) ? T(0) : row[jj];
          }
        }
      }
    }
  }
}

// Scatter-accumulate col [C*k*k, out_h*out_w] back into img [C,H,W].
template <typename T>
void col2im(const T* col, std::int64_t c, std::int64_t h, std::int64_t w,
            std::int64_t k, std::int64_t stride, std::int64_t pad,
            std::int64_t out_h, std::int64_t out_w, T* img) {
  const std::int64_t plane = h * w;
  const std::int64_t ncols = out_h * out_w;
  for (std::int64_t ch = 0; ch < c; ++ch) {
    for (std::int64_t ki = 0; ki < k; ++ki) {
      for (std::int64_t kj = 0; kj < k; ++kj) {
        const T* src = col + ((ch * k + ki) * k + kj) * ncols;
        T* dst = img + ch * plane;
        for (std::int64_t oi = 0; oi < out_h; ++oi) {
          const std::int64_t ii = oi * stride - pad + ki;
          if (ii < 0 || ii >= h) {
            src += out_w;
            continue;
          }
          T* row = dst + ii * w;
          for (std::int64_t oj = 0; oj < out_w; ++oj) {
            const std::int64_t jj = oj * stride - pad + kj;
            if (jj >= 0 && jj < w) row[jj] += src[oj];
          }
          src += out_w;
        }
      }
    }
  }
}

}  // namespace detail

/// Cross-correlation with weights [OC, C, k, k] over input [N, C, H, W].
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w,
                         const Tensor<T>& b, std::int64_t stride,
                         std::int64_t pad, std::string_view name = "conv2d") {
  if (x.rank() != 4 || w.rank() != 4) shape_error(name, "expected 4-D input/weights");
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::int64_t oc = w.dim(0), k = w.dim(2);
  if (w.dim(1) != c)
    shape_error(name, "weights expect " + std::to_string(w.dim(1)) +
                          " input channels, got " + std::to_string(c));
  if (w.dim(3) != k) shape_error(name, "non-square kernel");
  if (b.numel() != oc) shape_error(name, "bias size mismatch");
  const std::int64_t oh = conv_out_dim(h, k, stride, pad);
  const std::int64_t ow = conv_out_dim(wd, k, stride, pad);
  if (oh <= 0 || ow <= 0) shape_error(name, "input " + x.shape_str() + " too small");

  Tensor<T> y({n, oc, oh, ow});
  const std::int64_t ckk = c * k * k, ncols = oh * ow;
  std::vector<T> col(static_cast<std::size_t>(ckk * ncols));
  CMapRM<T> wm(w.ptr(), oc, ckk);
  for (std::int64_t i = 0; i < n; ++i) {
    detail::im2col(x.ptr() + i * c * h * wd, c, h, wd, k, stride, pad, oh, ow,
                   col.data());
    CMapRM<T> cm(col.data(), ckk, ncols);
    MapRM<T> ym(y.ptr() + i * oc * ncols, oc, ncols);
    ym.noalias() = wm * cm;
    for (std::int64_t o = 0; o < oc; ++o) ym.row(o).array() += b.data[o];
  }
  return y;
}

template <typename T>
struct ConvGrads {
  Tensor<T> dx, dw, db;
};

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w,
                             const Tensor<T>& dy, std::int64_t stride,
                             std::int64_t pad,
                             std::string_view name = "conv2d") {
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::int64_t oc = w.dim(0), k = w.dim(2);
  const std::int64_t oh = dy.dim(2), ow = dy.dim(3);
  if (dy.dim(0) != n || dy.dim(1) != oc)
    shape_error(name, "upstream gradient shape " + dy.shape_str());
  ConvGrads<T> g{Tensor<T>(x.shape), Tensor<T>(w.shape), Tensor<T>({oc})};
  const std::int64_t ckk = c * k * k, ncols = oh * ow;
  std::vector<T> col(static_cast<std::size_t>(ckk * ncols));
  std::vector<T> dcol(static_cast<std::size_t>(ckk * ncols));
  CMapRM<T> wm(w.ptr(), oc, ckk);
  MapRM<T> dwm(g.dw.ptr(), oc, ckk);
  for (std::int64_t i = 0; i < n; ++i) {
    CMapRM<T> dym(dy.ptr() + i * oc * ncols, oc, ncols);
    detail::im2col(x.ptr() + i * c * h * wd, c, h, wd, k, stride, pad, oh, ow,
                   col.data());
    CMapRM<T> cm(col.data(), ckk, ncols);
    dwm.noalias() += dym * cm.transpose();
    MapRM<T> dcm(dcol.data(), ckk, ncols);
    dcm.noalias() = wm.transpose() * dym;
    detail::col2im(dcol.data(), c, h, wd, k, stride, pad, oh, ow,
                   g.dx.ptr() + i * c * h * wd);
    for (std::int64_t o = 0; o < oc; ++o) g.db.data[o] += dym.row(o).sum();
  }
  return g;
}

/// Transposed convolution with weights [C, OC, k, k] over input [N, C, H, W].
/// Inverts the shape map of conv2d with the same (k, stride, pad).
template <typename T>
Tensor<T> conv_transpose2d_forward(const Tensor<T>& x, const Tensor<T>& w,
                                   const Tensor<T>& b, std::int64_t stride,
                                   std::int64_t pad,
                                   std::string_view name = "conv_transpose2d") {
  if (x.rank() != 4 || w.rank() != 4) shape_error(name, "expected 4-D input/weights");
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  if (w.dim(0) != c)
    shape_error(name, "weights expect " + std::to_string(w.dim(0)) +
                          " input channels, got " + std::to_string(c));
  const std::int64_t oc = w.dim(1), k = w.dim(2);
  if (b.numel() != oc) shape_error(name, "bias size mismatch");
  const std::int64_t oh = conv_transpose_out_dim(h, k, stride, pad);
  const std::int64_t ow = conv_transpose_out_dim(wd, k, stride, pad);
  if (oh <= 0 || ow <= 0) shape_error(name, "input " + x.shape_str() + " too small");

  Tensor<T> y({n, oc, oh, ow});
  const std::int64_t ockk = oc * k * k, ncols = h * wd;
  std::vector<T> col(static_cast<std::size_t>(ockk * ncols));
  CMapRM<T> wm(w.ptr(), c, ockk);
  for (std::int64_t i = 0; i < n; ++i) {
    CMapRM<T> xm(x.ptr() + i * c * ncols, c, ncols);
    MapRM<T> cm(col.data(), ockk, ncols);
    cm.noalias() = wm.transpose() * xm;
    T* yimg = y.ptr() + i * oc * oh * ow;
    detail::col2im(col.data(), oc, oh, ow, k, stride, pad, h, wd, yimg);
    MapRM<T> ym(yimg, oc, oh * ow);
    for (std::int64_t o = 0; o < oc; ++o) ym.row(o).array() += b.data[o];
  }
  return y;
}

template <typename T>
ConvGrads<T> conv_transpose2d_backward(const Tensor<T>& x, const Tensor<T>& w,
                                       const Tensor<T>& dy, std::int64_t stride,
                                       std::int64_t pad,
                                       std::string_view name = "conv_transpose2d") {
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::int64_t oc = w.dim(1), k = w.dim(2);
  const std::int64_t oh = dy.dim(2), ow = dy.dim(3);
  if (dy.dim(0) != n || dy.dim(1) != oc)
    shape_error(name, "upstream gradient shape " + dy.shape_str());
  ConvGrads<T> g{Tensor<T>(x.shape), Tensor<T>(w.shape), Tensor<T>({oc})};
  const std::int64_t ockk = oc * k * k, ncols = h * wd;
  std::vector<T> dcol(static_cast<std::size_t>(ockk * ncols));
  CMapRM<T> wm(w.ptr(), c, ockk);
  MapRM<T> dwm(g.dw.ptr(), c, ockk);
  for (std::int64_t i = 0; i < n; ++i) {
    CMapRM<T> dym(dy.ptr() + i * oc * oh * ow, oc, oh * ow);
    detail::im2col(dy.ptr() + i * oc * oh * ow, oc, oh, ow, k, stride, pad, h,
                   wd, dcol.data());
    CMapRM<T> dcm(dcol.data(), ockk, ncols);
    MapRM<T> dxm(g.dx.ptr() + i * c * ncols, c, ncols);
    dxm.noalias() = wm * dcm;
    CMapRM<T> xm(x.ptr() + i * c * ncols, c, ncols);
    dwm.noalias() += xm * dcm.transpose();
    for (std::int64_t o = 0; o < oc; ++o) g.db.data[o] += dym.row(o).sum();
  }
  return g;
}

/// Fully connected layer, weights [Dout, Din], input [N, Din].
template <typename T>
Tensor<T> linear_forward(const Tensor<T>& x, const Tensor<T>& w,
                         const Tensor<T>& b, std::string_view name = "linear") {
  if (x.rank() != 2 || w.rank() != 2) shape_error(name, "expected 2-D input/weights");
  const std::int64_t n = x.dim(0), din = x.dim(1), dout = w.dim(0);
  if (w.dim(1) != din)
    shape_error(name, "weights expect " + std::to_string(w.dim(1)) +
                          " inputs, got " + std::to_string(din));
  if (b.numel() != dout) shape_error(name, "bias size mismatch");
  Tensor<T> y({n, dout});
  CMapRM<T> xm(x.ptr(), n, din), wm(w.ptr(), dout, din);
  MapRM<T> ym(y.ptr(), n, dout);
  ym.noalias() = xm * wm.transpose();
  CMapRM<T> bm(b.ptr(), 1, dout);
  ym.rowwise() += bm.row(0);
  return y;
}

template <typename T>
ConvGrads<T> linear_backward(const Tensor<T>& x, const Tensor<T>& w,
                             const Tensor<T>& dy,
                             std::string_view name = "linear") {
  const std::int64_t n = x.dim(0), din = x.dim(1), dout = w.dim(0);
  if (dy.dim(0) != n || dy.dim(1) != dout)
    shape_error(name, "upstream gradient shape " + dy.shape_str());
  ConvGrads<T> g{Tensor<T>(x.shape), Tensor<T>(w.shape), Tensor<T>({dout})};
  CMapRM<T> xm(x.ptr(), n, din), wm(w.ptr(), dout, din), dym(dy.ptr(), n, dout);
  MapRM<T>(g.dx.ptr(), n, din).noalias() = dym * wm;
  MapRM<T>(g.dw.ptr(), dout, din).noalias() = dym.transpose() * xm;
  MapRM<T>(g.db.ptr(), 1, dout).noalias() = dym.colwise().sum();
  return g;
}

/// Elementwise max(0, x). Subgradient at exactly 0 is 0.
template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.data)
    if (v <= T(0)) v = T(0);
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& dy) {
  Tensor<T> dx = dy;
  for (std::size_t i = 0; i < dx.data.size(); ++i)
    if (x.data[i] <= T(0)) dx.data[i] = T(0);
  return dx;
}

template <typename T>
Tensor<T> sigmoid_forward(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.data) {
    double z = static_cast<double>(v);
    v = static_cast<T>(z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                              : std::exp(z) / (1.0 + std::exp(z)));
  }
  return y;
}

/// Takes the forward output y, not the pre-activation.
template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& y, const Tensor<T>& dy) {
  Tensor<T> dx = dy;
  for (std::size_t i = 0; i < dx.data.size(); ++i)
    dx.data[i] *= y.data[i] * (T(1) - y.data[i]);
  return dx;
}

}  // namespace lns
