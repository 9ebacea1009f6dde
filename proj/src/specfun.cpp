#include "bglr/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "bglr/errors.hpp"

namespace bglr::specfun {
namespace {

constexpr double kShiftThreshold = 10.0;

// B_2, B_4, ..., B_20
constexpr std::array<double, 10> kBernoulli = {
    1.0 / 6.0,         -1.0 / 30.0, 1.0 / 42.0,          -1.0 / 30.0,       5.0 / 66.0,
    -691.0 / 2730.0,   7.0 / 6.0,   -3617.0 / 510.0,     43867.0 / 798.0,   -174611.0 / 330.0,
};

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(name) + ": argument must be positive and finite, got " +
                      std::to_string(x));
  }
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  double product = 1.0;
  while (x < kShiftThreshold) {
    product *= x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double power = inv;  // x^-(2k-1)
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    series += kBernoulli[k - 1] / (2.0 * k * (2.0 * k - 1.0)) * power;
    power *= inv2;
  }
  const double stirling =
      (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
  return stirling - std::log(product);
}

double digamma(double x) {
  require_positive(x, "digamma");
  double shift = 0.0;
  while (x < kShiftThreshold) {
    shift += 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  double series = 0.0;
  double power = inv2;  // x^-2k
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    series += kBernoulli[k - 1] / (2.0 * k) * power;
    power *= inv2;
  }
  return std::log(x) - 0.5 / x - series - shift;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double shift = 0.0;
  while (x < kShiftThreshold) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double power = inv2 * inv;  // x^-(2k+1)
  for (double b : kBernoulli) {
    series += b * power;
    power *= inv2;
  }
  return inv + 0.5 * inv2 + series + shift;
}

double tetragamma(double x) {
  require_positive(x, "tetragamma");
  double shift = 0.0;
  while (x < kShiftThreshold) {
    shift += 2.0 / (x * x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double power = inv2 * inv2;  // x^-(2k+2)
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    series += (2.0 * k + 1.0) * kBernoulli[k - 1] * power;
    power *= inv2;
  }
  return -inv2 - inv2 * inv - series - shift;
}

}  // namespace bglr::specfun
