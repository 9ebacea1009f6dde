#include "bglr/regression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include "bglr/digest.hpp"
#include "bglr/gld.hpp"

namespace bglr {

std::string digest_hex(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

}  // namespace bglr

namespace bglr::regression {

Dataset::Dataset(Eigen::MatrixXd design, Eigen::VectorXd response)
    : design_(std::move(design)), response_(std::move(response)) {
  const auto n = design_.rows();
  const auto p = design_.cols();
  if (p < 1) throw std::invalid_argument("Dataset: design matrix has no columns");
  if (response_.size() != n) {
    throw std::invalid_argument("Dataset: response length " + std::to_string(response_.size()) +
                                " does not match design rows " + std::to_string(n));
  }
  if (n < p + 1) {
    throw std::invalid_argument("Dataset: need n >= p + 1 observations (n=" + std::to_string(n) +
                                ", p=" + std::to_string(p) + ")");
  }
  if (!design_.allFinite() || !response_.allFinite()) {
    throw std::invalid_argument("Dataset: non-finite entries");
  }
  if ((design_.col(0).array() != 1.0).any()) {
    throw std::invalid_argument("Dataset: first design column must be the intercept (all ones)");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design_);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) throw std::invalid_argument("Dataset: design matrix is rank deficient");

  Fnv1a h;
  h.update(static_cast<std::uint64_t>(n));
  h.update(static_cast<std::uint64_t>(p));
  h.update(std::span<const double>(design_.data(), static_cast<std::size_t>(design_.size())));
  h.update(std::span<const double>(response_.data(), static_cast<std::size_t>(response_.size())));
  digest_ = h.value();
}

Dataset Dataset::with_intercept(const Eigen::MatrixXd& covariates, const Eigen::VectorXd& response) {
  Eigen::MatrixXd design(covariates.rows(), covariates.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(covariates.cols()) = covariates;
  return Dataset(std::move(design), response);
}

Dataset Dataset::simple(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("Dataset::simple: x and y differ in length");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd response(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = x[static_cast<std::size_t>(i)];
    response(i) = y[static_cast<std::size_t>(i)];
  }
  return Dataset(std::move(design), std::move(response));
}

bool ParamVector::valid() const noexcept {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) return false;
  const auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(beta.begin(), beta.end(), finite) &&
         std::all_of(beta_prime.begin(), beta_prime.end(), finite);
}

std::vector<double> ParamVector::flatten() const {
  std::vector<double> out(beta);
  out.insert(out.end(), beta_prime.begin(), beta_prime.end());
  out.push_back(alpha);
  return out;
}

ParamVector ParamVector::unflatten(std::span<const double> flat, std::size_t p, bool has_alpha) {
  const std::size_t expected = 2 * p + (has_alpha ? 1 : 0);
  if (flat.size() != expected) {
    throw std::invalid_argument("ParamVector::unflatten: expected " + std::to_string(expected) +
                                " values, got " + std::to_string(flat.size()));
  }
  ParamVector psi;
  psi.beta.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(p));
  psi.beta_prime.assign(flat.begin() + static_cast<std::ptrdiff_t>(p),
                        flat.begin() + static_cast<std::ptrdiff_t>(2 * p));
  psi.alpha = has_alpha ? flat[2 * p] : 1.0;
  return psi;
}

namespace {

void check_dims(const Dataset& ds, const ParamVector& psi) {
  if (psi.beta.size() != ds.p() || psi.beta_prime.size() != ds.p()) {
    throw std::invalid_argument("dimension mismatch: dataset has p=" + std::to_string(ds.p()) +
                                ", psi has " + std::to_string(psi.beta.size()) + "/" +
                                std::to_string(psi.beta_prime.size()) + " coefficients");
  }
}

Eigen::Map<const Eigen::VectorXd> as_vector(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

}  // namespace

LinearPredictors linear_predictors(const Dataset& ds, const ParamVector& psi) {
  check_dims(ds, psi);
  return {ds.design() * as_vector(psi.beta), ds.design() * as_vector(psi.beta_prime)};
}

std::vector<double> predict_location(const Dataset& ds, const ParamVector& psi) {
  check_dims(ds, psi);
  const Eigen::VectorXd eta = ds.design() * as_vector(psi.beta);
  return {eta.data(), eta.data() + eta.size()};
}

std::vector<double> predict_scale(const Dataset& ds, const ParamVector& psi, std::size_t* n_clamped) {
  check_dims(ds, psi);
  const Eigen::VectorXd eta_prime = ds.design() * as_vector(psi.beta_prime);
  std::vector<double> sigma(ds.n());
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    double e = eta_prime(static_cast<Eigen::Index>(i));
    if (e > kLogScaleLimit || e < -kLogScaleLimit) {
      e = std::clamp(e, -kLogScaleLimit, kLogScaleLimit);
      ++clamped;
    }
    sigma[i] = std::exp(e);
  }
  if (n_clamped != nullptr) *n_clamped = clamped;
  return sigma;
}

double log_likelihood(const Dataset& ds, const ParamVector& psi) {
  check_dims(ds, psi);
  if (!psi.valid()) return -std::numeric_limits<double>::infinity();
  const LinearPredictors lp = linear_predictors(ds, psi);
  const double log_alpha = std::log(psi.alpha);
  const Eigen::VectorXd& y = ds.response();
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double log_sigma = std::clamp(lp.eta_prime(i), -kLogScaleLimit, kLogScaleLimit);
    const double z = (y(i) - lp.eta(i)) * std::exp(-log_sigma);
    total += log_alpha - log_sigma - z - (psi.alpha + 1.0) * gld::softplus(-z);
  }
  return std::isnan(total) ? -std::numeric_limits<double>::infinity() : total;
}

std::vector<double> log_likelihood_gradient(const Dataset& ds, const ParamVector& psi) {
  check_dims(ds, psi);
  const std::size_t p = ds.p();
  std::vector<double> grad(2 * p + 1, 0.0);
  const LinearPredictors lp = linear_predictors(ds, psi);
  const Eigen::MatrixXd& x = ds.design();
  const Eigen::VectorXd& y = ds.response();
  const double alpha = psi.alpha;
  double sum_sp = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double inv_sigma = std::exp(-lp.eta_prime(i));
    const double z = (y(i) - lp.eta(i)) * inv_sigma;
    const double s = 1.0 / (1.0 + std::exp(z));
    const double dz = -1.0 + (alpha + 1.0) * s;  // d loglik_i / dz
    const double d_theta = -dz * inv_sigma;       // dz/dtheta = -1/sigma
    const double d_log_sigma = -1.0 - dz * z;     // dz/dln(sigma) = -z
    for (std::size_t j = 0; j < p; ++j) {
      const double xij = x(i, static_cast<Eigen::Index>(j));
      grad[j] += d_theta * xij;
      grad[p + j] += d_log_sigma * xij;
    }
    sum_sp += gld::softplus(-z);
  }
  grad[2 * p] = static_cast<double>(ds.n()) - alpha * sum_sp;
  return grad;
}

std::vector<double> residuals(const Dataset& ds, const ParamVector& psi) {
  const std::vector<double> theta = predict_location(ds, psi);
  const std::vector<double> sigma = predict_scale(ds, psi);
  std::vector<double> r(ds.n());
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = (ds.response()(static_cast<Eigen::Index>(i)) - theta[i]) / sigma[i];
  }
  return r;
}

}  // namespace bglr::regression
