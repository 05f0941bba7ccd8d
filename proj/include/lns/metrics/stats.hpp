#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace lns::metrics {

namespace detail {

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction.
// Double-precision accurate to ~1e-14 over the parameter ranges used by the
// t and F distributions here.
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

inline double incomplete_beta(double a, double b, double x) {
  if (a <= 0 || b <= 0) throw std::invalid_argument("incomplete_beta: a,b > 0");
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::betacf(a, b, x) / a;
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

inline double student_t_cdf(double t, double df) {
  const double x = df / (df + t * t);
  const double half_tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t >= 0 ? 1.0 - half_tail : half_tail;
}

inline double f_cdf(double f, double d1, double d2) {
  if (f <= 0) return 0.0;
  return incomplete_beta(0.5 * d1, 0.5 * d2, d1 * f / (d1 * f + d2));
}

struct TestResult {
  double statistic;
  double p_value;
  double df1 = 0, df2 = 0;
};

namespace detail {
inline void moments(const std::vector<double>& x, double& mean, double& var) {
  if (x.size() < 2)
    throw std::invalid_argument("stats: need at least 2 points per sample");
  double s = 0;
  for (double v : x) s += v;
  mean = s / double(x.size());
  double ss = 0;
  for (double v : x) ss += (v - mean) * (v - mean);
  var = ss / double(x.size() - 1);
}
}  // namespace detail

/// Two-sample two-tailed Welch t-test (unequal variances), with
/// Welch-Satterthwaite degrees of freedom.
inline TestResult welch_t(const std::vector<double>& a,
                          const std::vector<double>& b) {
  double ma, va, mb, vb;
  detail::moments(a, ma, va);
  detail::moments(b, mb, vb);
  const double na = double(a.size()), nb = double(b.size());
  const double se2 = va / na + vb / nb;
  if (se2 == 0)
    return {0.0, 1.0, na + nb - 2, 0};
  const double t = (ma - mb) / std::sqrt(se2);
  const double df = se2 * se2 / ((va / na) * (va / na) / (na - 1) +
                                 (vb / nb) * (vb / nb) / (nb - 1));
  const double p = 2.0 * (1.0 - student_t_cdf(std::fabs(t), df));
  return {t, std::min(1.0, p), df, 0};
}

/// Two-tailed F-test for equality of variances, F = var(a)/var(b).
inline TestResult f_test(const std::vector<double>& a,
                         const std::vector<double>& b) {
  double ma, va, mb, vb;
  detail::moments(a, ma, va);
  detail::moments(b, mb, vb);
  if (va <= 0 || vb <= 0)
    throw std::invalid_argument("f_test: degenerate sample (zero variance)");
  const double f = va / vb;
  const double d1 = double(a.size() - 1), d2 = double(b.size() - 1);
  const double c = f_cdf(f, d1, d2);
  return {f, std::min(1.0, 2.0 * std::min(c, 1.0 - c)), d1, d2};
}

/// Bonferroni adjustment: multiply by the comparison count, clamp at 1.
inline std::vector<double> bonferroni(const std::vector<double>& pvals, int m) {
  if (m <= 0) throw std::invalid_argument("bonferroni: m must be positive");
  std::vector<double> out(pvals.size());
  for (std::size_t i = 0; i < pvals.size(); ++i)
    out[i] = std::min(1.0, pvals[i] * double(m));
  return out;
}

struct Summary {
  double mean = 0;
  std::optional<double> sem;  // null when n == 1
  std::size_t n = 0;
};

inline Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("summarize: empty input");
  Summary s;
  s.n = values.size();
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / double(s.n);
  if (s.n >= 2) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sem = std::sqrt(ss / double(s.n - 1)) / std::sqrt(double(s.n));
  }
  return s;
}

}  // namespace lns::metrics
