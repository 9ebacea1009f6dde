#pragma once

// Generalized logistic regression: the location follows an identity link,
// theta_i = x_i' beta, and the GLD scale a log link, sigma_i = exp(x_i' beta_prime).

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace bglr::regression {

/// Design matrix (n x p, first column the intercept) and response. Immutable once built.
class Dataset {
 public:
  /// Validates: first column all ones, finite entries, n >= p + 1, full column rank.
  /// Throws std::invalid_argument on violation.
  Dataset(Eigen::MatrixXd design, Eigen::VectorXd response);

  /// Prepends the intercept column to the given covariates.
  static Dataset with_intercept(const Eigen::MatrixXd& covariates, const Eigen::VectorXd& response);

  /// Single-covariate convenience.
  static Dataset simple(std::span<const double> x, std::span<const double> y);

  const Eigen::MatrixXd& design() const noexcept { return design_; }
  const Eigen::VectorXd& response() const noexcept { return response_; }
  std::size_t n() const noexcept { return static_cast<std::size_t>(design_.rows()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(design_.cols()); }

  /// Content digest over dimensions, design and response.
  std::uint64_t digest() const noexcept { return digest_; }

 private:
  Eigen::MatrixXd design_;
  Eigen::VectorXd response_;
  std::uint64_t digest_ = 0;
};

/// psi = (beta, beta_prime, alpha). beta_prime models ln sigma.
struct ParamVector {
  std::vector<double> beta;
  std::vector<double> beta_prime;
  double alpha = 1.0;

  /// alpha > 0 and every entry finite.
  bool valid() const noexcept;
  std::size_t p() const noexcept { return beta.size(); }

  /// (beta, beta_prime, alpha) laid out contiguously; the sampler's state vector.
  std::vector<double> flatten() const;
  static ParamVector unflatten(std::span<const double> flat, std::size_t p, bool has_alpha = true);

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

struct LinearPredictors {
  Eigen::VectorXd eta;        // location, response units
  Eigen::VectorXd eta_prime;  // ln sigma
};

/// Linear predictors are clamped to this range before exponentiation.
inline constexpr double kLogScaleLimit = 700.0;

LinearPredictors linear_predictors(const Dataset& ds, const ParamVector& psi);

std::vector<double> predict_location(const Dataset& ds, const ParamVector& psi);

/// sigma_i = exp(clamp(x_i' beta_prime)). n_clamped, when given, receives the number of clamped rows.
std::vector<double> predict_scale(const Dataset& ds, const ParamVector& psi,
                                  std::size_t* n_clamped = nullptr);

/// Sum over observations of the GLD log-density at (theta_i, sigma_i, alpha).
/// Returns -infinity for an invalid psi; throws std::invalid_argument on a dimension mismatch.
double log_likelihood(const Dataset& ds, const ParamVector& psi);

/// Gradient of log_likelihood with respect to (beta, beta_prime, ln alpha).
std::vector<double> log_likelihood_gradient(const Dataset& ds, const ParamVector& psi);

/// (y_i - theta_i) / sigma_i
std::vector<double> residuals(const Dataset& ds, const ParamVector& psi);

}  // namespace bglr::regression
