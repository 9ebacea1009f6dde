#include "bglr/baselines.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bglr::baselines {

SlrFit slr_fit(const Dataset& ds) {
  const Eigen::MatrixXd& x = ds.design();
  const Eigen::VectorXd& y = ds.response();
  if (ds.n() <= ds.p()) throw std::invalid_argument("slr_fit: need n > p");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) throw std::invalid_argument("slr_fit: design matrix is rank deficient");

  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - x * beta;
  SlrFit fit;
  fit.beta.assign(beta.data(), beta.data() + beta.size());
  fit.rss = resid.squaredNorm();
  fit.residual_variance = fit.rss / static_cast<double>(ds.n() - ds.p());
  const Eigen::MatrixXd gram_inv = (x.transpose() * x).inverse();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    fit.standard_errors.push_back(std::sqrt(fit.residual_variance * gram_inv(j, j)));
  }
  return fit;
}

double bnr_log_likelihood(const Dataset& ds, std::span<const double> beta,
                          std::span<const double> beta_prime) {
  if (beta.size() != ds.p() || beta_prime.size() != ds.p()) {
    throw std::invalid_argument("bnr_log_likelihood: dimension mismatch");
  }
  const auto pi = static_cast<Eigen::Index>(ds.p());
  const Eigen::VectorXd mean = ds.design() * Eigen::Map<const Eigen::VectorXd>(beta.data(), pi);
  const Eigen::VectorXd log_var = ds.design() * Eigen::Map<const Eigen::VectorXd>(beta_prime.data(), pi);
  const Eigen::VectorXd& y = ds.response();
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double lv = std::clamp(log_var(i), -regression::kLogScaleLimit, regression::kLogScaleLimit);
    const double r = y(i) - mean(i);
    total += -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * lv - 0.5 * r * r * std::exp(-lv);
  }
  return std::isfinite(total) ? total : -std::numeric_limits<double>::infinity();
}

diagnostics::ModelLogLik model_log_likelihood(mcmc::Likelihood lik) {
  if (lik == mcmc::Likelihood::glr) {
    return [](const Dataset& ds, const ParamVector& psi) { return regression::log_likelihood(ds, psi); };
  }
  return [](const Dataset& ds, const ParamVector& psi) {
    return bnr_log_likelihood(ds, psi.beta, psi.beta_prime);
  };
}

BayesFit bayes_fit(const Dataset& ds, const mcmc::SamplerConfig& config, const BayesFitOptions& options) {
  BayesFit fit;
  fit.chains = mcmc::run_chains(ds, config, options.n_chains, options.seed, options.threads);
  fit.summary = diagnostics::summarize(fit.chains);
  if (fit.chains.size() >= 2) fit.rhat = diagnostics::gelman_rubin(fit.chains, options.split_rhat);
  fit.dic = diagnostics::dic(fit.chains, ds, model_log_likelihood(config.likelihood), options.plug_in,
                             std::string(mcmc::to_string(config.likelihood)));
  return fit;
}

BayesFit bnr_fit(const Dataset& ds, mcmc::SamplerConfig config, const BayesFitOptions& options) {
  config.likelihood = mcmc::Likelihood::normal;
  return bayes_fit(ds, config, options);
}

BayesFit bglr_fit(const Dataset& ds, mcmc::SamplerConfig config, const BayesFitOptions& options) {
  config.likelihood = mcmc::Likelihood::glr;
  return bayes_fit(ds, config, options);
}

}  // namespace bglr::baselines
