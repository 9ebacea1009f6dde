#pragma once

// Comparison models: ordinary least squares with fixed variance (SLR) and a
// Bayesian normal regression whose log-variance is linear in the covariates
// (BNR). Also the shared "fit a Bayesian model and diagnose it" routine used
// for both BNR and BGLR.

#include <optional>
#include <span>
#include <vector>

#include "bglr/diagnostics.hpp"
#include "bglr/mcmc.hpp"

namespace bglr::baselines {

using regression::Dataset;
using regression::ParamVector;

struct SlrFit {
  std::vector<double> beta;
  double residual_variance = 0.0;  // RSS / (n - p)
  std::vector<double> standard_errors;
  double rss = 0.0;
};

/// Least squares via column-pivoted QR. Throws std::invalid_argument on rank deficiency.
SlrFit slr_fit(const Dataset& ds);

/// sum_i [-ln(2 pi)/2 - eta'_i / 2 - (y_i - x_i' beta)^2 / (2 exp(eta'_i))], eta' = x' beta_prime.
/// -infinity on non-finite inputs.
double bnr_log_likelihood(const Dataset& ds, std::span<const double> beta,
                          std::span<const double> beta_prime);

/// Chains plus their summary, convergence report (when >= 2 chains) and DIC.
struct BayesFit {
  std::vector<mcmc::Chain> chains;
  diagnostics::PosteriorSummary summary;
  std::optional<diagnostics::RhatReport> rhat;
  diagnostics::DicResult dic;
};

struct BayesFitOptions {
  std::size_t n_chains = 4;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  diagnostics::PlugIn plug_in = diagnostics::PlugIn::mean;
  bool split_rhat = false;
};

/// Log-likelihood matching config.likelihood.
diagnostics::ModelLogLik model_log_likelihood(mcmc::Likelihood lik);

BayesFit bayes_fit(const Dataset& ds, const mcmc::SamplerConfig& config, const BayesFitOptions& options);

/// bayes_fit with the normal log-variance likelihood (config.likelihood is overridden).
BayesFit bnr_fit(const Dataset& ds, mcmc::SamplerConfig config, const BayesFitOptions& options);

/// bayes_fit with the generalized logistic likelihood.
BayesFit bglr_fit(const Dataset& ds, mcmc::SamplerConfig config, const BayesFitOptions& options);

}  // namespace bglr::baselines
