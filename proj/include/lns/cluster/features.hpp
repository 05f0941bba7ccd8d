#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lns::cluster {

/// Row-major n x f matrix of per-point feature vectors.
struct FeatureMatrix {
  std::int64_t n = 0, f = 0;
  std::vector<float> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::int64_t n_, std::int64_t f_)
      : n(n_), f(f_), data(static_cast<std::size_t>(n_ * f_), 0.0f) {
    if (n_ < 0 || f_ < 1)
      throw std::invalid_argument("FeatureMatrix: need n >= 0, f >= 1");
  }

  float* row(std::int64_t i) { return data.data() + i * f; }
  const float* row(std::int64_t i) const { return data.data() + i * f; }

  bool all_finite() const {
    for (float v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

/// Scale every row to unit L2 norm. Zero rows are left as zero; the return
/// value counts them so callers can flag the degenerate case.
inline std::int64_t normalize_rows(FeatureMatrix& m) {
  std::int64_t zero_rows = 0;
  for (std::int64_t i = 0; i < m.n; ++i) {
    float* r = m.row(i);
    double ss = 0;
    for (std::int64_t j = 0; j < m.f; ++j) ss += double(r[j]) * double(r[j]);
    if (ss == 0.0) {
      ++zero_rows;
      continue;
    }
    const float inv = float(1.0 / std::sqrt(ss));
    for (std::int64_t j = 0; j < m.f; ++j) r[j] *= inv;
  }
  return zero_rows;
}

}  // namespace lns::cluster
