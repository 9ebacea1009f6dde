#pragma once

// Random-walk Metropolis-Hastings for the regression posteriors.
//
// The sampler updates one coordinate at a time (Metropolis-within-Gibbs):
// regression coefficients get symmetric normal random-walk proposals, the
// shape alpha gets a gamma proposal with mean equal to the current value and
// a fixed variance, corrected by the Hastings ratio. Step sizes may adapt
// during burn-in (Robbins-Monro on the log step toward a target acceptance
// rate) and are frozen afterwards.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bglr/random.hpp"
#include "bglr/regression.hpp"

namespace bglr::mcmc {

using regression::Dataset;
using regression::ParamVector;

struct PriorSpec {
  double coef_variance = 1e4;  // N(0, coef_variance) on every beta and beta_prime entry
  double alpha_shape = 1.0;    // alpha ~ Gamma(shape, rate)
  double alpha_rate = 1.0;

  /// Throws std::invalid_argument unless every field is positive and finite.
  void validate() const;
};

struct ProposalConfig {
  std::vector<double> coef_step_sd;  // 2p entries; empty means 0.1 for every coefficient
  double alpha_proposal_variance = 0.1;
  bool adapt = true;
  double adapt_target_rate = 0.3;
  std::size_t adapt_window = 200;

  void validate(std::size_t p) const;
};

/// GLR is the generalized logistic likelihood (BGLR); normal is the
/// log-variance normal likelihood used by the BNR baseline (no alpha).
enum class Likelihood { glr, normal };

std::string_view to_string(Likelihood lik);
Likelihood likelihood_from_string(std::string_view s);

struct SamplerConfig {
  PriorSpec prior;
  ProposalConfig proposal;
  std::size_t n_iter = 20000;
  std::size_t burn_in = 10000;
  Likelihood likelihood = Likelihood::glr;

  /// Stable "key=value;..." rendering of every field that affects the draws.
  std::string canonical() const;
  std::string digest() const;
};

struct Chain {
  std::vector<std::string> names;  // column names of draws
  Eigen::MatrixXd draws;           // retained draws x parameters
  std::vector<double> log_posterior_trace;
  std::vector<double> acceptance_rate;  // per block, over retained iterations
  std::vector<double> final_steps;      // proposal sd (coefficients) or variance (alpha)
  std::vector<double> initial_state;
  std::uint64_t seed = 0;
  std::string config_digest;
  Likelihood likelihood = Likelihood::glr;

  std::size_t size() const noexcept { return static_cast<std::size_t>(draws.rows()); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(draws.cols()); }
};

/// Column names: beta0..beta{p-1}, bp0..bp{p-1}, then alpha for GLR.
std::vector<std::string> parameter_names(std::size_t p, Likelihood lik);

// --- priors and posterior ----------------------------------------------------

double normal_log_density(double x, double mean, double variance) noexcept;
double gamma_log_density(double x, double shape, double rate) noexcept;

/// Independent normal priors on beta, beta_prime plus Gamma(a1, b1) on alpha.
/// -infinity for alpha <= 0.
double log_prior(const ParamVector& psi, const PriorSpec& prior);

/// As log_prior, without the alpha term (normal likelihood has no shape).
double log_prior_coefficients(const ParamVector& psi, const PriorSpec& prior);

/// log_likelihood + log_prior, up to the normalizing constant.
double log_posterior(const Dataset& ds, const ParamVector& psi, const PriorSpec& prior);

// --- proposals ---------------------------------------------------------------

struct Proposal {
  double candidate;
  double log_q_ratio;  // ln q(current | candidate) - ln q(candidate | current)
};

Proposal propose_coef(double current, double step_sd, Rng& rng);

/// Gamma with shape current^2 / v and rate current / v (mean current, variance v).
Proposal propose_alpha(double current, double proposal_variance, Rng& rng);

double alpha_log_q_ratio(double current, double candidate, double proposal_variance) noexcept;

// --- generic blockwise machinery ----------------------------------------------

enum class BlockKind { random_walk, positive_gamma };

/// A target density updated one coordinate at a time. Implementations may
/// cache intermediate quantities: log_density_with(b, v) is always followed by
/// at most one commit(b, v) with the same arguments before the next evaluation.
class BlockTarget {
 public:
  virtual ~BlockTarget() = default;
  virtual std::size_t dimension() const = 0;
  virtual double value(std::size_t block) const = 0;
  virtual double log_density() const = 0;
  virtual double log_density_with(std::size_t block, double candidate) = 0;
  virtual void commit(std::size_t block, double candidate) = 0;

  std::vector<double> state() const;
};

/// Wraps an arbitrary log-density of the full state vector.
class FunctionTarget final : public BlockTarget {
 public:
  using LogDensity = std::function<double(std::span<const double>)>;
  FunctionTarget(LogDensity f, std::vector<double> start);

  std::size_t dimension() const override { return state_.size(); }
  double value(std::size_t block) const override { return state_[block]; }
  double log_density() const override { return current_; }
  double log_density_with(std::size_t block, double candidate) override;
  void commit(std::size_t block, double candidate) override;

 private:
  LogDensity f_;
  std::vector<double> state_;
  std::vector<double> scratch_;
  double current_;
  double pending_ = 0.0;
};

/// Posterior of the GLR (or normal log-variance) regression with cached
/// predictors: coefficient updates cost O(n), alpha updates O(1).
class RegressionTarget final : public BlockTarget {
 public:
  RegressionTarget(const Dataset& ds, Likelihood lik, PriorSpec prior, std::span<const double> start);

  std::size_t dimension() const override { return state_.size(); }
  double value(std::size_t block) const override { return state_[block]; }
  double log_density() const override { return loglik_ + logprior_; }
  double log_density_with(std::size_t block, double candidate) override;
  void commit(std::size_t block, double candidate) override;

  double log_likelihood() const noexcept { return loglik_; }

 private:
  double likelihood_from_sums(double a, double b, double alpha) const noexcept;
  void accumulate(std::span<const double> theta, std::span<const double> log_scale,
                  std::span<const double> inv_scale, double& a, double& b) const noexcept;
  double prior_with(std::size_t block, double candidate) const;

  const Dataset& ds_;
  Likelihood lik_;
  PriorSpec prior_;
  std::size_t p_;
  std::vector<double> state_;
  std::vector<double> theta_, log_scale_, inv_scale_;
  double sum_a_ = 0.0, sum_b_ = 0.0;
  double loglik_ = 0.0, logprior_ = 0.0;

  std::vector<double> theta_new_, log_scale_new_, inv_scale_new_;
  double sum_a_new_ = 0.0, sum_b_new_ = 0.0;
  double loglik_new_ = 0.0, logprior_new_ = 0.0;
};

/// One accept/reject test per block, in order. steps[b] is the proposal sd
/// (random_walk) or variance (positive_gamma). Returns 1 for accepted blocks.
std::vector<std::uint8_t> sweep(BlockTarget& target, std::span<const BlockKind> kinds,
                                std::span<const double> steps, Rng& rng);

struct RunSettings {
  std::size_t n_iter = 20000;
  std::size_t burn_in = 10000;
  bool adapt = true;
  double adapt_target_rate = 0.3;
  std::size_t adapt_window = 200;
};

/// Runs sweeps, adapting steps during burn-in, and records retained draws.
Chain run_blockwise(BlockTarget& target, std::span<const BlockKind> kinds, std::vector<double> steps,
                    const RunSettings& settings, Rng& rng);

// --- regression sampler -------------------------------------------------------

/// Block kinds and initial steps for a regression posterior of dimension p.
std::vector<BlockKind> block_kinds(std::size_t p, Likelihood lik);
std::vector<double> initial_steps(std::size_t p, Likelihood lik, const ProposalConfig& proposal);

/// OLS beta; beta_prime_0 = ln(residual sd) for GLR or ln(residual variance)
/// for the normal likelihood, other beta_prime zero; alpha = 1. Throws
/// InitializationError when the residual variance is zero.
ParamVector initial_point(const Dataset& ds, Likelihood lik);

/// Multiplies each coefficient by 1 + 0.5 u, u ~ U[-1, 1].
ParamVector overdisperse(const ParamVector& psi, Rng& rng);

struct MhStepResult {
  ParamVector psi;
  std::vector<std::uint8_t> accepted;
};

/// One blockwise sweep of the BGLR posterior starting at psi.
MhStepResult mh_step(const Dataset& ds, const ParamVector& psi, const PriorSpec& prior,
                     const ProposalConfig& proposal, Rng& rng);

/// Deterministic given seed. Starts from `start` if given, else from an
/// overdispersed initial_point drawn with the chain's own generator.
Chain run_chain(const Dataset& ds, const SamplerConfig& config, std::uint64_t seed,
                std::optional<ParamVector> start = std::nullopt);

/// Chain k uses seed base_seed + k.
std::vector<Chain> run_chains(const Dataset& ds, const SamplerConfig& config, std::size_t n_chains,
                              std::uint64_t base_seed, std::size_t threads = 1);

}  // namespace bglr::mcmc
