#pragma once

// Type I generalized logistic distribution with location theta, scale sigma
// and shape alpha:
//
//   f(x) = (alpha / sigma) e^{-z} / (1 + e^{-z})^{alpha + 1},  z = (x - theta) / sigma
//   F(x) = (1 + e^{-z})^{-alpha}
//
// alpha > 1 gives positive skew, alpha < 1 negative skew, alpha = 1 the
// (scaled, shifted) logistic.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bglr/random.hpp"

namespace bglr::gld {

class GldParams {
 public:
  /// Throws DomainError unless theta is finite and sigma, alpha are positive and finite.
  GldParams(double theta, double sigma, double alpha);

  double theta() const noexcept { return theta_; }
  double sigma() const noexcept { return sigma_; }
  double alpha() const noexcept { return alpha_; }

  friend bool operator==(const GldParams&, const GldParams&) = default;

 private:
  double theta_;
  double sigma_;
  double alpha_;
};

struct GldMoments {
  double mean;
  double variance;
  double skewness;  // third central moment over variance^{3/2}
};

enum class Collapse { none, alpha_to_infinity, alpha_to_zero };

std::string_view to_string(Collapse c);

struct FitStatus {
  bool converged = false;
  Collapse collapse = Collapse::none;
  std::size_t iterations = 0;
  double final_log_likelihood = 0.0;
  double gradient_norm = 0.0;  // max-norm of the per-observation gradient in (theta, ln sigma, ln alpha)
};

struct MleResult {
  GldParams params;
  FitStatus status;
};

struct MleOptions {
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-8;
  double stall_tolerance = 1e-6;  // accepted when the line search can no longer descend
  double alpha_upper = 1e6;
  double alpha_lower = 1e-6;
};

/// ln(1 + e^t) without overflow.
double softplus(double t) noexcept;

double log_pdf(double x, const GldParams& p) noexcept;
double pdf(double x, const GldParams& p) noexcept;
double cdf(double x, const GldParams& p) noexcept;

/// Closed-form inverse CDF: theta - sigma * ln(prob^{-1/alpha} - 1). Throws DomainError unless 0 < prob < 1.
double quantile(double prob, const GldParams& p);

/// One inverse-transform draw.
double draw(const GldParams& p, Rng& rng);

std::vector<double> sample(const GldParams& p, std::size_t n, std::uint64_t seed);

GldMoments moments(const GldParams& p);

/// Standardized skewness as a function of the shape alone.
double skewness_for_shape(double alpha);

/// Open interval of skewness values a GLD can attain: (-2, 12 sqrt(6) zeta(3) / pi^3).
struct SkewnessRange {
  double lower;
  double upper;
};
SkewnessRange attainable_skewness();

/// Sample mean, unbiased variance, and g1 skewness.
GldMoments sample_moments(std::span<const double> data);

/// Method-of-moments estimate. Requires n >= 10; throws EstimationError for
/// zero variance or a sample skewness outside attainable_skewness().
GldParams mom_estimate(std::span<const double> data);

double log_likelihood(std::span<const double> data, const GldParams& p) noexcept;

/// Relative residual of the alpha first-order condition,
/// |alpha - n / sum softplus(-(x_i - theta)/sigma)| / (n / sum ...).
double shape_identity_residual(std::span<const double> data, const GldParams& p) noexcept;

/// Maximum likelihood by BFGS on (theta, ln sigma, ln alpha). When init is
/// empty, starts from mom_estimate or, if that fails, (median, 1.81 MAD, 1).
/// Requires n >= 10. Collapse and non-convergence are reported in the status.
MleResult mle_fit(std::span<const double> data, std::optional<GldParams> init = std::nullopt,
                  const MleOptions& options = {});

}  // namespace bglr::gld
