#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace lns::metrics {

/// Pair-count contingency between two partitions of the same point set.
struct ContingencyTable {
  std::vector<std::vector<std::int64_t>> counts;  // r x s
  std::vector<std::int64_t> row_sums, col_sums;
  std::int64_t n = 0;

  static ContingencyTable build(const std::vector<int>& a,
                                const std::vector<int>& b) {
    if (a.size() != b.size())
      throw std::invalid_argument("contingency: label arrays differ in length");
    std::unordered_map<int, int> ra, rb;
    for (int v : a) ra.emplace(v, static_cast<int>(ra.size()));
    for (int v : b) rb.emplace(v, static_cast<int>(rb.size()));
    ContingencyTable t;
    t.n = static_cast<std::int64_t>(a.size());
    t.counts.assign(ra.size(), std::vector<std::int64_t>(rb.size(), 0));
    for (std::size_t i = 0; i < a.size(); ++i)
      t.counts[ra[a[i]]][rb[b[i]]] += 1;
    t.row_sums.assign(ra.size(), 0);
    t.col_sums.assign(rb.size(), 0);
    for (std::size_t i = 0; i < t.counts.size(); ++i)
      for (std::size_t j = 0; j < t.counts[i].size(); ++j) {
        t.row_sums[i] += t.counts[i][j];
        t.col_sums[j] += t.counts[i][j];
      }
    return t;
  }
};

inline double comb2(std::int64_t n) {
  return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
}

/// Adjusted Rand Index (Hubert & Arabie). Symmetric, permutation-invariant.
/// Returns 0 when the adjustment denominator vanishes (e.g. both partitions
/// constant), which makes the all-background-vs-anything score exactly 0.
inline double ari(const std::vector<int>& pred, const std::vector<int>& target) {
  const auto t = ContingencyTable::build(pred, target);
  double index = 0;
  for (const auto& row : t.counts)
    for (auto c : row) index += comb2(c);
  double sum_a = 0, sum_b = 0;
  for (auto r : t.row_sums) sum_a += comb2(r);
  for (auto c : t.col_sums) sum_b += comb2(c);
  const double total = comb2(t.n);
  if (total == 0) return 0.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 0.0;
  return (index - expected) / denom;
}

}  // namespace lns::metrics
