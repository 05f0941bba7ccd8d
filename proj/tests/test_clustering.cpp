#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "lns/cluster/agglomerative.hpp"
#include "lns/cluster/kmeans.hpp"
#include "lns/core/rng.hpp"

using namespace lns;
using namespace lns::cluster;

namespace {

// From-scratch Ward reference: at every step recompute the exact variance
// increase of every cluster pair from the raw points and merge the argmin,
// breaking ties toward the lexicographically smallest pair. No Lance-Williams
// updates, no chains -- an independent route from the production code.
std::vector<int> ward_brute_force(const FeatureMatrix& x, int k) {
  const int n = int(x.n), f = int(x.f);
  std::vector<std::vector<int>> clusters(n);
  for (int i = 0; i < n; ++i) clusters[i] = {i};

  auto centroid = [&](const std::vector<int>& c, std::vector<double>& out) {
    out.assign(f, 0.0);
    for (int p : c)
      for (int j = 0; j < f; ++j) out[j] += x.row(p)[j];
    for (auto& v : out) v /= double(c.size());
  };

  while (int(clusters.size()) > k) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 1;
    std::vector<double> ca, cb;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      centroid(clusters[i], ca);
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        centroid(clusters[j], cb);
        double d2 = 0;
        for (int t = 0; t < f; ++t) d2 += (ca[t] - cb[t]) * (ca[t] - cb[t]);
        const double na = double(clusters[i].size()), nb = double(clusters[j].size());
        const double cost = na * nb / (na + nb) * d2;
        if (cost < best) {
          best = cost;
          bi = i;
          bj = j;
        }
      }
    }
    auto merged = clusters[bi];
    merged.insert(merged.end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + bj);
    clusters[bi] = std::move(merged);
  }

  std::vector<int> labels(n, -1);
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (int p : clusters[c]) labels[p] = int(c);
  return labels;
}

// Partition equality up to relabeling.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> fwd, bwd;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [itf, newf] = fwd.emplace(a[i], b[i]);
    if (!newf && itf->second != b[i]) return false;
    auto [itb, newb] = bwd.emplace(b[i], a[i]);
    if (!newb && itb->second != a[i]) return false;
  }
  return true;
}

FeatureMatrix random_features(Rng& rng, int n, int f, double lo = -2,
                              double hi = 2) {
  FeatureMatrix m(n, f);
  for (auto& v : m.data) v = float(rng.uniform(lo, hi));
  return m;
}

bool labels_are_dense_partition(const std::vector<int>& labels, int k) {
  std::set<int> seen(labels.begin(), labels.end());
  if (int(seen.size()) != k) return false;
  return *seen.begin() == 0 && *seen.rbegin() == k - 1;
}

}  // namespace

TEST_CASE("ward separates 1-D points {0, 1, 10} at k=2") {
  FeatureMatrix m(3, 1);
  m.data = {0.0f, 1.0f, 10.0f};
  auto labels = agglomerative(m, 2, Linkage::kWard);
  REQUIRE(labels[0] == labels[1]);
  REQUIRE(labels[0] != labels[2]);
}

TEST_CASE("k=n gives singleton clusters, k=1 gives one") {
  Rng rng(1);
  auto m = random_features(rng, 6, 3);
  auto singletons = agglomerative(m, 6, Linkage::kWard);
  std::set<int> uniq(singletons.begin(), singletons.end());
  REQUIRE(uniq.size() == 6);
  auto one = agglomerative(m, 1, Linkage::kWard);
  REQUIRE(std::set<int>(one.begin(), one.end()).size() == 1);
}

TEST_CASE("ward matches from-scratch brute force on 500 random instances") {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 3 + int(rng.next_below(8));  // 3..10 points
    const int f = 1 + int(rng.next_below(3));
    const int k = 1 + int(rng.next_below(std::uint64_t(n)));
    auto m = random_features(rng, n, f);
    auto ours = agglomerative(m, k, Linkage::kWard);
    auto ref = ward_brute_force(m, k);
    INFO("trial " << trial << " n=" << n << " f=" << f << " k=" << k);
    REQUIRE(same_partition(ours, ref));
  }
}

TEST_CASE("ward heights are non-decreasing and partitions are dense") {
  Rng rng(7);
  auto m = random_features(rng, 40, 4);
  auto dg = agglomerative_dendrogram(m, Linkage::kWard);
  REQUIRE(dg.merges.size() == 39);
  for (std::size_t i = 1; i < dg.merges.size(); ++i)
    REQUIRE(dg.merges[i].height >= dg.merges[i - 1].height);
  for (int k : {1, 2, 5, 17, 40}) {
    auto labels = dg.cut(k);
    REQUIRE(labels_are_dense_partition(labels, k));
  }
}

TEST_CASE("ward result is invariant to uniform positive feature scaling") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = random_features(rng, 50, 3);
    auto scaled = m;
    for (auto& v : scaled.data) v *= 37.5f;
    for (int k : {2, 4, 7}) {
      auto a = agglomerative(m, k, Linkage::kWard);
      auto b = agglomerative(scaled, k, Linkage::kWard);
      REQUIRE(same_partition(a, b));
    }
  }
}

TEST_CASE("point order changes labels only up to relabeling") {
  Rng rng(21);
  auto m = random_features(rng, 30, 3);
  // Reverse the point order.
  FeatureMatrix rev(m.n, m.f);
  for (std::int64_t i = 0; i < m.n; ++i)
    std::copy(m.row(m.n - 1 - i), m.row(m.n - 1 - i) + m.f, rev.row(i));
  for (int k : {2, 3, 6}) {
    auto a = agglomerative(m, k, Linkage::kWard);
    auto b = agglomerative(rev, k, Linkage::kWard);
    std::vector<int> b_unrev(b.rbegin(), b.rend());
    REQUIRE(same_partition(a, b_unrev));
  }
}

TEST_CASE("complete linkage separates the same obvious blobs") {
  FeatureMatrix m(6, 2);
  m.data = {0.0f, 0.0f, 0.1f, 0.0f, 0.0f, 0.1f,
            5.0f, 5.0f, 5.1f, 5.0f, 5.0f, 5.1f};
  auto labels = agglomerative(m, 2, Linkage::kComplete);
  REQUIRE(labels[0] == labels[1]);
  REQUIRE(labels[1] == labels[2]);
  REQUIRE(labels[3] == labels[4]);
  REQUIRE(labels[4] == labels[5]);
  REQUIRE(labels[0] != labels[3]);
}

TEST_CASE("errors: bad k and non-finite features") {
  FeatureMatrix m(4, 2);
  REQUIRE_THROWS_AS(agglomerative(m, 0, Linkage::kWard), std::invalid_argument);
  REQUIRE_THROWS_AS(agglomerative(m, 5, Linkage::kWard), std::invalid_argument);
  m.data[3] = std::numeric_limits<float>::infinity();
  REQUIRE_THROWS_AS(agglomerative(m, 2, Linkage::kWard), std::invalid_argument);
}

TEST_CASE("normalize_rows scales to unit norm and flags zero rows") {
  FeatureMatrix m(3, 2);
  m.data = {3.0f, 4.0f, 0.0f, 0.0f, 1.0f, 0.0f};
  auto zero = normalize_rows(m);
  REQUIRE(zero == 1);
  REQUIRE_THAT(m.data[0], Catch::Matchers::WithinAbs(0.6, 1e-6));
  REQUIRE_THAT(m.data[1], Catch::Matchers::WithinAbs(0.8, 1e-6));
  REQUIRE(m.data[2] == 0.0f);
  REQUIRE(m.data[3] == 0.0f);
  REQUIRE(m.data[4] == 1.0f);  // unit rows unchanged
}

TEST_CASE("kmeans recovers two well-separated blobs") {
  Rng rng(5);
  FeatureMatrix m(40, 2);
  for (int i = 0; i < 20; ++i) {
    m.row(i)[0] = float(rng.normal(0.0, 0.05));
    m.row(i)[1] = float(rng.normal(0.0, 0.05));
    m.row(20 + i)[0] = float(rng.normal(10.0, 0.05));
    m.row(20 + i)[1] = float(rng.normal(10.0, 0.05));
  }
  Rng krng = rng.stream("kmeans");
  auto res = kmeans(m, 2, krng);
  for (int i = 1; i < 20; ++i) REQUIRE(res.labels[i] == res.labels[0]);
  for (int i = 21; i < 40; ++i) REQUIRE(res.labels[i] == res.labels[20]);
  REQUIRE(res.labels[0] != res.labels[20]);
}

TEST_CASE("kmeans k=1 labels everything together") {
  Rng rng(6);
  auto m = random_features(rng, 10, 3);
  Rng krng(1);
  auto res = kmeans(m, 1, krng);
  REQUIRE(labels_are_dense_partition(res.labels, 1));
}

TEST_CASE("kmeans objective is non-increasing across restarts of Lloyd") {
  // Run with increasing max_iters; inertia must not increase with more
  // iterations from the same seeding.
  Rng rng(8);
  auto m = random_features(rng, 60, 4);
  double prev = std::numeric_limits<double>::infinity();
  for (int iters : {1, 2, 4, 8, 32}) {
    Rng krng(123);
    auto res = kmeans(m, 4, krng, iters);
    REQUIRE(res.inertia <= prev + 1e-9);
    prev = res.inertia;
  }
}

TEST_CASE("kmeans is deterministic under a fixed seed") {
  Rng rng(9);
  auto m = random_features(rng, 50, 3);
  Rng k1(42), k2(42);
  auto a = kmeans(m, 3, k1);
  auto b = kmeans(m, 3, k2);
  REQUIRE(a.labels == b.labels);
}
