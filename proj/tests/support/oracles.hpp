#pragma once

// Test-only reference computations, written independently of the library paths they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

/// Eq. (1) evaluated literally.
inline double gld_pdf_naive(double x, double theta, double sigma, double alpha) {
  const double e = std::exp(-(x - theta) / sigma);
  return alpha / sigma * e / std::pow(1.0 + e, alpha + 1.0);
}

/// Composite Simpson rule with `intervals` (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_distance(std::vector<double> data, const std::function<double(double)>& cdf) {
  std::sort(data.begin(), data.end());
  const double n = static_cast<double>(data.size());
  double d = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = cdf(data[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

struct Moments3 {
  double mean, variance, skewness;
};

inline Moments3 moments3(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  return {mean, m2 / (n - 1.0), (m3 / n) / std::pow(m2 / n, 1.5)};
}

/// Full-sample statistics with Monte Carlo standard errors from `batches` equal batches.
struct MonteCarloMoments {
  Moments3 value;
  Moments3 se;
};

inline MonteCarloMoments batch_moments(std::span<const double> v, std::size_t batches) {
  const std::size_t size = v.size() / batches;
  std::vector<Moments3> per;
  for (std::size_t b = 0; b < batches; ++b) per.push_back(moments3(v.subspan(b * size, size)));
  auto se_of = [&](auto member) {
    double mean = 0.0;
    for (const auto& m : per) mean += m.*member;
    mean /= batches;
    double ss = 0.0;
    for (const auto& m : per) ss += (m.*member - mean) * (m.*member - mean);
    return std::sqrt(ss / (batches - 1.0) / batches);
  };
  return {moments3(v), {se_of(&Moments3::mean), se_of(&Moments3::variance), se_of(&Moments3::skewness)}};
}

inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

inline double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sd_of(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace oracle
