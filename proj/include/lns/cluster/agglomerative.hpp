#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lns/cluster/features.hpp"

namespace lns::cluster {

enum class Linkage { kWard, kComplete };

/// One agglomeration step. `a` and `b` are representative original point ids
/// (the smallest point id inside each merged cluster), `height` is the merge
/// cost: within-cluster variance increase for Ward, cluster diameter
/// (Euclidean) for complete linkage. `size` is the merged cluster size.
struct Merge {
  int a = 0, b = 0;
  double height = 0;
  int size = 0;
};

struct Dendrogram {
  int n = 0;
  std::vector<Merge> merges;  // ascending height

  /// Partition into exactly k clusters. Labels are 0..k-1 in order of first
  /// appearance when scanning points.
  std::vector<int> cut(int k) const {
    if (k < 1 || k > n) throw std::invalid_argument("Dendrogram::cut: bad k");
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (int i = 0; i < n - k; ++i) {
      int ra = find(merges[i].a), rb = find(merges[i].b);
      parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::vector<int> labels(n, -1);
    int next = 0;
    for (int p = 0; p < n; ++p) {
      int r = find(p);
      if (labels[r] < 0) labels[r] = next++;
      labels[p] = labels[r];
    }
    return labels;
  }
};

namespace detail {

// Pairwise squared Euclidean distances via the Gram matrix.
inline std::vector<double> squared_distances(const FeatureMatrix& x) {
  const std::int64_t n = x.n;
  Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      xm(x.data.data(), n, x.f);
  Eigen::MatrixXf gram = xm * xm.transpose();
  std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const double sii = gram(i, i);
    for (std::int64_t j = i + 1; j < n; ++j) {
      double v = sii + double(gram(j, j)) - 2.0 * double(gram(i, j));
      if (v < 0) v = 0;
      d[i * n + j] = d[j * n + i] = v;
    }
  }
  return d;
}

}  // namespace detail

/// Agglomerative clustering over Euclidean feature space using the
/// nearest-neighbor-chain algorithm with Lance-Williams updates.
///
/// Ward's working distance is d2(A,B) = 2 |A||B| / (|A|+|B|) * ||cA - cB||^2
/// (twice the variance increase of the merge); complete linkage tracks the
/// squared cluster diameter. Both are reducible, so the chain algorithm
/// produces the greedy merge sequence. Nearest-neighbor ties break toward the
/// lowest cluster index.
inline Dendrogram agglomerative_dendrogram(const FeatureMatrix& x,
                                           Linkage link) {
  if (!x.all_finite())
    throw std::invalid_argument("agglomerative: non-finite features");
  const int n = static_cast<int>(x.n);
  Dendrogram dg;
  dg.n = n;
  if (n <= 1) return dg;

  std::vector<double> dist = detail::squared_distances(x);
  std::vector<std::int64_t> size(n, 1);
  std::vector<int> rep(n);
  std::iota(rep.begin(), rep.end(), 0);
  std::vector<char> active(n, 1);
  std::vector<int> chain;
  chain.reserve(n);
  int remaining = n;

  auto row = [&](int i) { return dist.data() + std::int64_t(i) * n; };

  struct Raw {
    int a, b;
    double d2;
  };
  std::vector<Raw> raw;
  raw.reserve(n - 1);

  while (remaining > 1) {
    if (chain.empty()) {
      for (int i = 0; i < n; ++i)
        if (active[i]) {
          chain.push_back(i);
          break;
        }
    }
    while (true) {
      const int a = chain.back();
      const double* da = row(a);
      int nn = -1;
      double best = std::numeric_limits<double>::infinity();
      const int prev = chain.size() >= 2 ? chain[chain.size() - 2] : -1;
      for (int j = 0; j < n; ++j) {
        if (!active[j] || j == a) continue;
        if (da[j] < best || (da[j] == best && j == prev)) {
          best = da[j];
          nn = j;
        }
      }
      if (nn == prev) {
        chain.pop_back();
        chain.pop_back();
        const int lo = std::min(a, prev), hi = std::max(a, prev);
        raw.push_back({rep[lo] < rep[hi] ? rep[lo] : rep[hi],
                       rep[lo] < rep[hi] ? rep[hi] : rep[lo], best});
        // Merge hi into lo, then refresh lo's distance row.
        const std::int64_t na = size[lo], nb = size[hi];
        const double dab = best;
        for (int k = 0; k < n; ++k) {
          if (!active[k] || k == lo || k == hi) continue;
          double nd;
          if (link == Linkage::kWard) {
            const std::int64_t nk = size[k];
            nd = ((double(na + nk) * row(lo)[k] + double(nb + nk) * row(hi)[k] -
                   double(nk) * dab) /
                  double(na + nb + nk));
          } else {
            nd = std::max(row(lo)[k], row(hi)[k]);
          }
          row(lo)[k] = nd;
          row(k)[lo] = nd;
        }
        size[lo] = na + nb;
        rep[lo] = std::min(rep[lo], rep[hi]);
        active[hi] = 0;
        --remaining;
        break;
      }
      chain.push_back(nn);
    }
  }

  std::stable_sort(raw.begin(), raw.end(),
                   [](const Raw& l, const Raw& r) { return l.d2 < r.d2; });

  // Replay in sorted order to assign merged-cluster sizes and final heights.
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<std::int64_t> csize(n, 1);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  dg.merges.reserve(raw.size());
  for (const auto& r : raw) {
    const int ra = find(r.a), rb = find(r.b);
    const std::int64_t sz = csize[ra] + csize[rb];
    parent[std::max(ra, rb)] = std::min(ra, rb);
    csize[std::min(ra, rb)] = sz;
    const double height =
        link == Linkage::kWard ? 0.5 * r.d2 : std::sqrt(r.d2);
    dg.merges.push_back({r.a, r.b, height, int(sz)});
  }
  return dg;
}

inline std::vector<int> agglomerative(const FeatureMatrix& x, int k,
                                      Linkage link) {
  if (k < 1 || k > x.n)
    throw std::invalid_argument("agglomerative: k out of range (k=" +
                                std::to_string(k) + ", n=" +
                                std::to_string(x.n) + ")");
  return agglomerative_dendrogram(x, link).cut(k);
}

}  // namespace lns::cluster
