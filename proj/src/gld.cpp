#include "bglr/gld.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bglr/errors.hpp"
#include "bglr/specfun.hpp"

namespace bglr::gld {

GldParams::GldParams(double theta, double sigma, double alpha)
    : theta_(theta), sigma_(sigma), alpha_(alpha) {
  if (!std::isfinite(theta)) throw DomainError("GldParams: theta must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("GldParams: sigma must be positive, got " + std::to_string(sigma));
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("GldParams: alpha must be positive, got " + std::to_string(alpha));
  }
}

std::string_view to_string(Collapse c) {
  switch (c) {
    case Collapse::none:
      return "none";
    case Collapse::alpha_to_infinity:
      return "alpha_to_infinity";
    case Collapse::alpha_to_zero:
      return "alpha_to_zero";
  }
  return "unknown";
}

double softplus(double t) noexcept {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

double log_pdf(double x, const GldParams& p) noexcept {
  const double z = (x - p.theta()) / p.sigma();
  return std::log(p.alpha()) - std::log(p.sigma()) - z - (p.alpha() + 1.0) * softplus(-z);
}

double pdf(double x, const GldParams& p) noexcept { return std::exp(log_pdf(x, p)); }

double cdf(double x, const GldParams& p) noexcept {
  const double z = (x - p.theta()) / p.sigma();
  return std::exp(-p.alpha() * softplus(-z));
}

double quantile(double prob, const GldParams& p) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw DomainError("quantile: probability must lie in (0, 1), got " + std::to_string(prob));
  }
  // prob^{-1/alpha} - 1 == expm1(-ln(prob) / alpha)
  return p.theta() - p.sigma() * std::log(std::expm1(-std::log(prob) / p.alpha()));
}

double draw(const GldParams& p, Rng& rng) { return quantile(uniform_open(rng), p); }

std::vector<double> sample(const GldParams& p, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& v : out) v = draw(p, rng);
  return out;
}

double skewness_for_shape(double alpha) {
  using namespace specfun;
  const double spread = trigamma(alpha) + trigamma(1.0);
  return (tetragamma(alpha) - tetragamma(1.0)) / std::pow(spread, 1.5);
}

GldMoments moments(const GldParams& p) {
  using namespace specfun;
  const double a = p.alpha();
  return GldMoments{
      .mean = p.theta() + p.sigma() * (digamma(a) - digamma(1.0)),
      .variance = p.sigma() * p.sigma() * (trigamma(1.0) + trigamma(a)),
      .skewness = skewness_for_shape(a),
  };
}

SkewnessRange attainable_skewness() {
  constexpr double zeta3 = 1.2020569031595942854;
  constexpr double pi3 = std::numbers::pi * std::numbers::pi * std::numbers::pi;
  return {-2.0, 12.0 * std::sqrt(6.0) * zeta3 / pi3};
}

GldMoments sample_moments(std::span<const double> data) {
  const double n = static_cast<double>(data.size());
  if (data.size() < 3) throw std::invalid_argument("sample_moments: need at least 3 values");
  double mean = 0.0;
  for (double v : data) mean += v;
  mean /= n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : data) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  const double variance = m2 / (n - 1.0);
  m2 /= n;
  m3 /= n;
  const double skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  return {mean, variance, skew};
}

GldParams mom_estimate(std::span<const double> data) {
  if (data.size() < 10) throw std::invalid_argument("mom_estimate: need at least 10 values");
  const GldMoments m = sample_moments(data);
  if (!(m.variance > 0.0)) throw EstimationError("mom_estimate: sample variance is zero");

  const SkewnessRange range = attainable_skewness();
  if (!(m.skewness > range.lower && m.skewness < range.upper)) {
    std::ostringstream msg;
    msg << "mom_estimate: sample skewness " << m.skewness
        << " outside the attainable GLD range (" << range.lower << ", " << range.upper << ")";
    throw EstimationError(msg.str());
  }

  // skewness is increasing in alpha; bisect on ln(alpha).
  double lo = -25.0;
  double hi = 25.0;
  if (skewness_for_shape(std::exp(lo)) > m.skewness || skewness_for_shape(std::exp(hi)) < m.skewness) {
    throw EstimationError("mom_estimate: sample skewness too close to the attainable bounds");
  }
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (skewness_for_shape(std::exp(mid)) < m.skewness) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double alpha = std::exp(0.5 * (lo + hi));
  using namespace specfun;
  const double sigma = std::sqrt(m.variance / (trigamma(1.0) + trigamma(alpha)));
  const double theta = m.mean - sigma * (digamma(alpha) - digamma(1.0));
  return GldParams(theta, sigma, alpha);
}

double log_likelihood(std::span<const double> data, const GldParams& p) noexcept {
  double total = 0.0;
  for (double x : data) total += log_pdf(x, p);
  return total;
}

namespace {

double softplus_sum(std::span<const double> data, double theta, double sigma) {
  double s = 0.0;
  for (double x : data) s += softplus(-(x - theta) / sigma);
  return s;
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  }
  return m;
}

// Mean negative log-likelihood and its gradient in u = (theta, ln sigma, ln alpha).
struct Objective {
  std::span<const double> data;

  double operator()(const Eigen::Vector3d& u, Eigen::Vector3d* grad) const {
    const double theta = u[0];
    const double sigma = std::exp(u[1]);
    const double alpha = std::exp(u[2]);
    const double n = static_cast<double>(data.size());
    double sum_z = 0.0;
    double sum_sp = 0.0;
    double g_theta = 0.0;
    double g_log_sigma = 0.0;
    for (double x : data) {
      const double z = (x - theta) / sigma;
      const double sp = softplus(-z);
      sum_z += z;
      sum_sp += sp;
      if (grad != nullptr) {
        const double s = 1.0 / (1.0 + std::exp(z));
        const double dz = -1.0 + (alpha + 1.0) * s;  // d loglik_i / dz
        g_theta -= dz;
        g_log_sigma += -1.0 - dz * z;
      }
    }
    const double loglik = n * (u[2] - u[1]) - sum_z - (alpha + 1.0) * sum_sp;
    if (grad != nullptr) {
      // d z / d theta = -1/sigma
      (*grad)[0] = -(g_theta / sigma) / n;
      (*grad)[1] = -g_log_sigma / n;
      (*grad)[2] = -(n - alpha * sum_sp) / n;
    }
    return -loglik / n;
  }
};

}  // namespace

double shape_identity_residual(std::span<const double> data, const GldParams& p) noexcept {
  const double profiled = static_cast<double>(data.size()) / softplus_sum(data, p.theta(), p.sigma());
  return std::abs(p.alpha() - profiled) / profiled;
}

MleResult mle_fit(std::span<const double> data, std::optional<GldParams> init,
                  const MleOptions& options) {
  if (data.size() < 10) throw std::invalid_argument("mle_fit: need at least 10 values");
  for (double v : data) {
    if (!std::isfinite(v)) throw std::invalid_argument("mle_fit: data contain non-finite values");
  }

  if (!init) {
    try {
      init = mom_estimate(data);
    } catch (const EstimationError&) {
      std::vector<double> copy(data.begin(), data.end());
      const double med = median_of(copy);
      for (double& v : copy) v = std::abs(v - med);
      double mad = median_of(copy);
      if (!(mad > 0.0)) throw EstimationError("mle_fit: data have zero spread");
      init = GldParams(med, 1.81 * mad, 1.0);
    }
  }

  const Objective objective{data};
  Eigen::Vector3d u(init->theta(), std::log(init->sigma()), std::log(init->alpha()));
  Eigen::Vector3d grad;
  double value = objective(u, &grad);
  Eigen::Matrix3d inv_hessian = Eigen::Matrix3d::Identity();

  FitStatus status;
  const auto gradient_small = [&] { return grad.cwiseAbs().maxCoeff() < options.gradient_tolerance; };

  for (status.iterations = 0; status.iterations < options.max_iterations; ++status.iterations) {
    if (gradient_small()) {
      status.converged = true;
      break;
    }
    Eigen::Vector3d direction = -inv_hessian * grad;
    if (direction.dot(grad) >= 0.0) {
      inv_hessian.setIdentity();
      direction = -grad;
    }
    const double longest = direction.cwiseAbs().maxCoeff();
    if (longest > 5.0) direction *= 5.0 / longest;

    // Armijo backtracking.
    double step = 1.0;
    Eigen::Vector3d next;
    Eigen::Vector3d next_grad;
    double next_value = 0.0;
    bool moved = false;
    for (int tries = 0; tries < 60; ++tries) {
      next = u + step * direction;
      next_value = objective(next, &next_grad);
      if (std::isfinite(next_value) && next_value < value && next_value <= value + 1e-4 * step * direction.dot(grad)) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      // No decrease representable in double precision: accept if stationary enough.
      status.converged = grad.cwiseAbs().maxCoeff() < options.stall_tolerance;
      break;
    }

    const Eigen::Vector3d s = next - u;
    const Eigen::Vector3d y = next_grad - grad;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix3d left = Eigen::Matrix3d::Identity() - rho * s * y.transpose();
      inv_hessian = left * inv_hessian * left.transpose() + rho * s * s.transpose();
    }
    u = next;
    grad = next_grad;
    value = next_value;

    const double alpha = std::exp(u[2]);
    if (alpha > options.alpha_upper) {
      status.collapse = Collapse::alpha_to_infinity;
      break;
    }
    if (alpha < options.alpha_lower) {
      status.collapse = Collapse::alpha_to_zero;
      break;
    }
  }

  if (status.converged) {
    // Exact maximizer over alpha at the converged (theta, sigma).
    u[2] = std::log(static_cast<double>(data.size()) / softplus_sum(data, u[0], std::exp(u[1])));
    value = objective(u, &grad);
  }

  status.final_log_likelihood = -value * static_cast<double>(data.size());
  status.gradient_norm = grad.cwiseAbs().maxCoeff();
  if (status.collapse != Collapse::none) status.converged = false;

  // Keep the reported parameters representable after a collapse.
  const double alpha = std::clamp(std::exp(u[2]), 1e-300, 1e300);
  const double sigma = std::clamp(std::exp(u[1]), 1e-300, 1e300);
  return MleResult{GldParams(u[0], sigma, alpha), status};
}

}  // namespace bglr::gld
