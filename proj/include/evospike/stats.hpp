#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "evospike/errors.hpp"

namespace evospike {
namespace stats {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the regularized incomplete beta, evaluated with
// the modified Lentz method. Converges quickly for x < (a+1)/(a+b+2).
inline double beta_continued_fraction(double a, double b, double x) {
  static constexpr int kMaxIterations = 400;
  static constexpr double kEpsilon = 1e-15;
  static constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEpsilon) return h;
  }
  throw NumericError("incomplete beta: continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw NumericError("incomplete beta: a and b must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw NumericError("incomplete beta: x must lie in [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  const double front = std::exp(log_front);
  // Use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) to stay in the
  // fast-converging region of the continued fraction.
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Two-tailed p-value of the t statistic:
// p = I_{df/(df+t^2)}(df/2, 1/2).
inline double student_t_two_tailed_p(double t, double df) {
  if (!(df > 0.0)) throw NumericError("t-test: df must be positive");
  if (!std::isfinite(t)) throw NumericError("t-test: non-finite t statistic");
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double mean_diff = 0.0;
  // True when the differences have zero variance, so the t statistic is
  // undefined; p is then reported as 0 (consistent nonzero shift) or 1
  // (identical samples).
  bool degenerate = false;
};

namespace detail {

inline TTestResult t_test_from_diffs(const std::vector<double>& diffs) {
  const std::size_t n = diffs.size();
  if (n < 2) throw ConfigError("t-test: need at least two observations");
  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(n);
  double sq = 0.0;
  for (double d : diffs) sq += (d - mean) * (d - mean);
  const double var = sq / static_cast<double>(n - 1);

  TTestResult result;
  result.df = static_cast<double>(n - 1);
  result.mean_diff = mean;
  if (var == 0.0) {
    result.degenerate = true;
    result.t = 0.0;
    result.p = (mean == 0.0) ? 1.0 : 0.0;
    return result;
  }
  result.t = mean / std::sqrt(var / static_cast<double>(n));
  result.p = student_t_two_tailed_p(result.t, result.df);
  return result;
}

}  // namespace detail

// Paired two-tailed t-test on matched samples.
inline TTestResult paired_t_test(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw ConfigError("paired t-test: samples must have equal length");
  }
  std::vector<double> diffs(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diffs[i] = a[i] - b[i];
  return detail::t_test_from_diffs(diffs);
}

// One-sample two-tailed t-test of `sample` against the fixed mean `mu0`.
inline TTestResult one_sample_t_test(const std::vector<double>& sample,
                                     double mu0) {
  std::vector<double> diffs(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) diffs[i] = sample[i] - mu0;
  return detail::t_test_from_diffs(diffs);
}

}  // namespace stats
}  // namespace evospike
