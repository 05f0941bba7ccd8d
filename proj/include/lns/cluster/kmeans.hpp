#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lns/cluster/features.hpp"
#include "lns/core/rng.hpp"

namespace lns::cluster {

struct KMeansResult {
  std::vector<int> labels;
  double inertia = 0;
  int iterations = 0;
};

/// Lloyd iterations from a k-means++ seeding. Runs until the assignment is a
/// fixpoint or max_iters. An emptied cluster is re-seeded to the point
/// farthest from its current center.
inline KMeansResult kmeans(const FeatureMatrix& x, int k, Rng& rng,
                           int max_iters = 300) {
  const std::int64_t n = x.n, f = x.f;
  if (k < 1 || k > n) throw std::invalid_argument("kmeans: k out of range");
  if (!x.all_finite()) throw std::invalid_argument("kmeans: non-finite features");

  // k-means++ seeding.
  std::vector<double> centers(std::size_t(k) * f);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  auto center = [&](int c) { return centers.data() + std::int64_t(c) * f; };
  {
    const std::int64_t first = std::int64_t(rng.next_below(std::uint64_t(n)));
    for (std::int64_t j = 0; j < f; ++j) center(0)[j] = x.row(first)[j];
    for (int c = 1; c < k; ++c) {
      double total = 0;
      for (std::int64_t i = 0; i < n; ++i) {
        double s = 0;
        const float* r = x.row(i);
        const double* cc = center(c - 1);
        for (std::int64_t j = 0; j < f; ++j) {
          const double d = double(r[j]) - cc[j];
          s += d * d;
        }
        if (s < d2[i]) d2[i] = s;
        total += d2[i];
      }
      std::int64_t pick = 0;
      if (total > 0) {
        double target = rng.next_double() * total, acc = 0;
        for (std::int64_t i = 0; i < n; ++i) {
          acc += d2[i];
          if (acc >= target) {
            pick = i;
            break;
          }
        }
      } else {
        pick = std::int64_t(rng.next_below(std::uint64_t(n)));
      }
      for (std::int64_t j = 0; j < f; ++j) center(c)[j] = x.row(pick)[j];
    }
  }

  KMeansResult res;
  res.labels.assign(n, -1);
  std::vector<std::int64_t> counts(k, 0);
  std::vector<double> sums(std::size_t(k) * f);
  std::vector<double> best_d2(n, 0);

  for (int it = 0; it < max_iters; ++it) {
    res.iterations = it + 1;
    bool changed = false;
    for (std::int64_t i = 0; i < n; ++i) {
      const float* r = x.row(i);
      int bestc = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double s = 0;
        const double* cc = center(c);
        for (std::int64_t j = 0; j < f; ++j) {
          const double d = double(r[j]) - cc[j];
          s += d * d;
        }
        if (s < best) {
          best = s;
          bestc = c;
        }
      }
      best_d2[i] = best;
      if (res.labels[i] != bestc) {
        res.labels[i] = bestc;
        changed = true;
      }
    }
    if (!changed && it > 0) break;

    std::fill(counts.begin(), counts.end(), 0);
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
      const int c = res.labels[i];
      counts[c]++;
      const float* r = x.row(i);
      double* s = sums.data() + std::int64_t(c) * f;
      for (std::int64_t j = 0; j < f; ++j) s[j] += r[j];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed to the globally farthest point from its own center.
        std::int64_t far = 0;
        double fd = -1;
        for (std::int64_t i = 0; i < n; ++i)
          if (best_d2[i] > fd) {
            fd = best_d2[i];
            far = i;
          }
        for (std::int64_t j = 0; j < f; ++j) center(c)[j] = x.row(far)[j];
        continue;
      }
      const double inv = 1.0 / double(counts[c]);
      double* s = sums.data() + std::int64_t(c) * f;
      for (std::int64_t j = 0; j < f; ++j) center(c)[j] = s[j] * inv;
    }
  }

  res.inertia = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const float* r = x.row(i);
    const double* cc = center(res.labels[i]);
    for (std::int64_t j = 0; j < f; ++j) {
      const double d = double(r[j]) - cc[j];
      res.inertia += d * d;
    }
  }

  // Relabel to 0..k-1 by first appearance so the label set is dense.
  std::vector<int> remap(k, -1);
  int next = 0;
  for (auto& l : res.labels) {
    if (remap[l] < 0) remap[l] = next++;
    l = remap[l];
  }
  return res;
}

}  // namespace lns::cluster
