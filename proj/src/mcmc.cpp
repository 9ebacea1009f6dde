#include "bglr/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bglr/digest.hpp"
#include "bglr/errors.hpp"
#include "bglr/format.hpp"
#include "bglr/gld.hpp"
#include "bglr/parallel.hpp"
#include "bglr/specfun.hpp"

namespace bglr::mcmc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

void PriorSpec::validate() const {
  if (!positive_finite(coef_variance) || !positive_finite(alpha_shape) || !positive_finite(alpha_rate)) {
    throw std::invalid_argument("PriorSpec: coef_variance, alpha_shape and alpha_rate must be positive");
  }
}

void ProposalConfig::validate(std::size_t p) const {
  if (!coef_step_sd.empty() && coef_step_sd.size() != 2 * p) {
    throw std::invalid_argument("ProposalConfig: coef_step_sd needs " + std::to_string(2 * p) +
                                " entries, got " + std::to_string(coef_step_sd.size()));
  }
  if (!std::all_of(coef_step_sd.begin(), coef_step_sd.end(), positive_finite) ||
      !positive_finite(alpha_proposal_variance)) {
    throw std::invalid_argument("ProposalConfig: step sizes must be positive");
  }
  if (!(adapt_target_rate > 0.0 && adapt_target_rate < 1.0)) {
    throw std::invalid_argument("ProposalConfig: adapt_target_rate must lie in (0, 1)");
  }
  if (adapt_window == 0) throw std::invalid_argument("ProposalConfig: adapt_window must be positive");
}

std::string_view to_string(Likelihood lik) { return lik == Likelihood::glr ? "bglr" : "bnr"; }

Likelihood likelihood_from_string(std::string_view s) {
  if (s == "bglr" || s == "glr") return Likelihood::glr;
  if (s == "bnr" || s == "normal") return Likelihood::normal;
  throw std::invalid_argument("unknown likelihood '" + std::string(s) + "'");
}

std::string SamplerConfig::canonical() const {
  std::ostringstream out;
  out << "likelihood=" << to_string(likelihood) << ";coef_variance=" << format_double(prior.coef_variance)
      << ";alpha_shape=" << format_double(prior.alpha_shape)
      << ";alpha_rate=" << format_double(prior.alpha_rate) << ";coef_step_sd=";
  for (std::size_t i = 0; i < proposal.coef_step_sd.size(); ++i) {
    out << (i ? "," : "") << format_double(proposal.coef_step_sd[i]);
  }
  out << ";alpha_proposal_variance=" << format_double(proposal.alpha_proposal_variance)
      << ";adapt=" << (proposal.adapt ? 1 : 0)
      << ";adapt_target_rate=" << format_double(proposal.adapt_target_rate)
      << ";adapt_window=" << proposal.adapt_window << ";n_iter=" << n_iter << ";burn_in=" << burn_in;
  return out.str();
}

std::string SamplerConfig::digest() const { return digest_hex(digest_of(canonical())); }

std::vector<std::string> parameter_names(std::size_t p, Likelihood lik) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back("beta" + std::to_string(j));
  for (std::size_t j = 0; j < p; ++j) names.push_back("bp" + std::to_string(j));
  if (lik == Likelihood::glr) names.emplace_back("alpha");
  return names;
}

double normal_log_density(double x, double mean, double variance) noexcept {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * d * d / variance;
}

double gamma_log_density(double x, double shape, double rate) noexcept {
  if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
  return shape * std::log(rate) - specfun::log_gamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_prior_coefficients(const ParamVector& psi, const PriorSpec& prior) {
  double total = 0.0;
  for (double b : psi.beta) total += normal_log_density(b, 0.0, prior.coef_variance);
  for (double b : psi.beta_prime) total += normal_log_density(b, 0.0, prior.coef_variance);
  return std::isnan(total) ? kNegInf : total;
}

double log_prior(const ParamVector& psi, const PriorSpec& prior) {
  if (!(psi.alpha > 0.0)) return kNegInf;
  return log_prior_coefficients(psi, prior) + gamma_log_density(psi.alpha, prior.alpha_shape, prior.alpha_rate);
}

double log_posterior(const Dataset& ds, const ParamVector& psi, const PriorSpec& prior) {
  const double lp = log_prior(psi, prior);
  if (lp == kNegInf) return kNegInf;
  return regression::log_likelihood(ds, psi) + lp;
}

Proposal propose_coef(double current, double step_sd, Rng& rng) {
  std::normal_distribution<double> step(0.0, step_sd);
  return {current + step(rng), 0.0};
}

double alpha_log_q_ratio(double current, double candidate, double v) noexcept {
  const double reverse = gamma_log_density(current, candidate * candidate / v, candidate / v);
  const double forward = gamma_log_density(candidate, current * current / v, current / v);
  return reverse - forward;
}

Proposal propose_alpha(double current, double proposal_variance, Rng& rng) {
  std::gamma_distribution<double> gamma(current * current / proposal_variance,
                                        proposal_variance / current);
  double candidate;
  do {
    candidate = gamma(rng);
  } while (!(candidate > 0.0) || !std::isfinite(candidate));
  return {candidate, alpha_log_q_ratio(current, candidate, proposal_variance)};
}

// --- targets -------------------------------------------------------------------

std::vector<double> BlockTarget::state() const {
  std::vector<double> out(dimension());
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = value(b);
  return out;
}

FunctionTarget::FunctionTarget(LogDensity f, std::vector<double> start)
    : f_(std::move(f)), state_(std::move(start)), scratch_(state_), current_(f_(state_)) {}

double FunctionTarget::log_density_with(std::size_t block, double candidate) {
  scratch_ = state_;
  scratch_[block] = candidate;
  pending_ = f_(scratch_);
  return pending_;
}

void FunctionTarget::commit(std::size_t block, double candidate) {
  state_[block] = candidate;
  current_ = pending_;
}

RegressionTarget::RegressionTarget(const Dataset& ds, Likelihood lik, PriorSpec prior,
                                   std::span<const double> start)
    : ds_(ds), lik_(lik), prior_(prior), p_(ds.p()), state_(start.begin(), start.end()) {
  const std::size_t expected = 2 * p_ + (lik == Likelihood::glr ? 1 : 0);
  if (state_.size() != expected) {
    throw std::invalid_argument("RegressionTarget: start has " + std::to_string(state_.size()) +
                                " entries, expected " + std::to_string(expected));
  }
  const auto n = static_cast<Eigen::Index>(ds.n());
  const auto pi = static_cast<Eigen::Index>(p_);
  const Eigen::Map<const Eigen::VectorXd> beta(state_.data(), pi);
  const Eigen::Map<const Eigen::VectorXd> beta_prime(state_.data() + p_, pi);
  theta_.resize(ds.n());
  log_scale_.resize(ds.n());
  inv_scale_.resize(ds.n());
  Eigen::Map<Eigen::VectorXd>(theta_.data(), n) = ds.design() * beta;
  Eigen::Map<Eigen::VectorXd>(log_scale_.data(), n) = ds.design() * beta_prime;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    log_scale_[i] = std::clamp(log_scale_[i], -regression::kLogScaleLimit, regression::kLogScaleLimit);
    inv_scale_[i] = std::exp(-log_scale_[i]);
  }
  theta_new_ = theta_;
  log_scale_new_ = log_scale_;
  inv_scale_new_ = inv_scale_;
  accumulate(theta_, log_scale_, inv_scale_, sum_a_, sum_b_);
  loglik_ = likelihood_from_sums(sum_a_, sum_b_, lik_ == Likelihood::glr ? state_[2 * p_] : 1.0);
  logprior_ = prior_with(0, state_[0]);
}

void RegressionTarget::accumulate(std::span<const double> theta, std::span<const double> log_scale,
                                  std::span<const double> inv_scale, double& a, double& b) const noexcept {
  const Eigen::VectorXd& y = ds_.response();
  a = 0.0;
  b = 0.0;
  const std::size_t n = theta.size();
  if (lik_ == Likelihood::glr) {
    for (std::size_t i = 0; i < n; ++i) {
      const double z = (y(static_cast<Eigen::Index>(i)) - theta[i]) * inv_scale[i];
      a += log_scale[i] + z;
      b += gld::softplus(-z);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y(static_cast<Eigen::Index>(i)) - theta[i];
      a += log_scale[i];
      b += r * r * inv_scale[i];
    }
  }
}

double RegressionTarget::likelihood_from_sums(double a, double b, double alpha) const noexcept {
  const double n = static_cast<double>(ds_.n());
  double ll;
  if (lik_ == Likelihood::glr) {
    if (!(alpha > 0.0)) return kNegInf;
    ll = n * std::log(alpha) - a - (alpha + 1.0) * b;
  } else {
    ll = -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * a - 0.5 * b;
  }
  return std::isnan(ll) ? kNegInf : ll;
}

double RegressionTarget::prior_with(std::size_t block, double candidate) const {
  double total = 0.0;
  for (std::size_t j = 0; j < 2 * p_; ++j) {
    total += normal_log_density(j == block ? candidate : state_[j], 0.0, prior_.coef_variance);
  }
  if (lik_ == Likelihood::glr) {
    const double alpha = block == 2 * p_ ? candidate : state_[2 * p_];
    total += gamma_log_density(alpha, prior_.alpha_shape, prior_.alpha_rate);
  }
  return std::isnan(total) ? kNegInf : total;
}

double RegressionTarget::log_density_with(std::size_t block, double candidate) {
  const auto n = static_cast<Eigen::Index>(ds_.n());
  const auto pi = static_cast<Eigen::Index>(p_);
  if (!std::isfinite(candidate)) {
    loglik_new_ = kNegInf;
    return kNegInf;
  }
  logprior_new_ = prior_with(block, candidate);
  if (block < p_) {
    std::vector<double> beta(state_.begin(), state_.begin() + pi);
    beta[block] = candidate;
    Eigen::Map<Eigen::VectorXd>(theta_new_.data(), n) =
        ds_.design() * Eigen::Map<const Eigen::VectorXd>(beta.data(), pi);
    accumulate(theta_new_, log_scale_, inv_scale_, sum_a_new_, sum_b_new_);
  } else if (block < 2 * p_) {
    std::vector<double> beta_prime(state_.begin() + pi, state_.begin() + 2 * pi);
    beta_prime[block - p_] = candidate;
    Eigen::Map<Eigen::VectorXd>(log_scale_new_.data(), n) =
        ds_.design() * Eigen::Map<const Eigen::VectorXd>(beta_prime.data(), pi);
    for (std::size_t i = 0; i < ds_.n(); ++i) {
      log_scale_new_[i] =
          std::clamp(log_scale_new_[i], -regression::kLogScaleLimit, regression::kLogScaleLimit);
      inv_scale_new_[i] = std::exp(-log_scale_new_[i]);
    }
    accumulate(theta_, log_scale_new_, inv_scale_new_, sum_a_new_, sum_b_new_);
  } else {
    sum_a_new_ = sum_a_;
    sum_b_new_ = sum_b_;
  }
  const double alpha =
      lik_ == Likelihood::glr ? (block == 2 * p_ ? candidate : state_[2 * p_]) : 1.0;
  loglik_new_ = likelihood_from_sums(sum_a_new_, sum_b_new_, alpha);
  return loglik_new_ + logprior_new_;
}

void RegressionTarget::commit(std::size_t block, double candidate) {
  if (block < p_) {
    theta_.swap(theta_new_);
  } else if (block < 2 * p_) {
    log_scale_.swap(log_scale_new_);
    inv_scale_.swap(inv_scale_new_);
  }
  state_[block] = candidate;
  sum_a_ = sum_a_new_;
  sum_b_ = sum_b_new_;
  loglik_ = loglik_new_;
  logprior_ = logprior_new_;
}

// --- sampler -----------------------------------------------------------------

std::vector<std::uint8_t> sweep(BlockTarget& target, std::span<const BlockKind> kinds,
                                std::span<const double> steps, Rng& rng) {
  std::vector<std::uint8_t> accepted(target.dimension(), 0);
  double current = target.log_density();
  for (std::size_t b = 0; b < target.dimension(); ++b) {
    const double value = target.value(b);
    const Proposal prop = kinds[b] == BlockKind::positive_gamma ? propose_alpha(value, steps[b], rng)
                                                                : propose_coef(value, steps[b], rng);
    const double u = std::generate_canonical<double, 53>(rng);
    const double candidate_density = target.log_density_with(b, prop.candidate);
    if (candidate_density == kNegInf || std::isnan(candidate_density)) continue;
    const double log_lambda = candidate_density - current + prop.log_q_ratio;
    if (std::isnan(log_lambda)) continue;
    if (u < std::exp(std::min(0.0, log_lambda))) {
      target.commit(b, prop.candidate);
      current = candidate_density;
      accepted[b] = 1;
    }
  }
  return accepted;
}

Chain run_blockwise(BlockTarget& target, std::span<const BlockKind> kinds, std::vector<double> steps,
                    const RunSettings& settings, Rng& rng) {
  if (settings.burn_in >= settings.n_iter) {
    throw std::invalid_argument("run: burn_in must be smaller than n_iter");
  }
  const std::size_t d = target.dimension();
  if (kinds.size() != d || steps.size() != d) {
    throw std::invalid_argument("run: kinds/steps do not match the target dimension");
  }
  const std::size_t kept = settings.n_iter - settings.burn_in;

  Chain chain;
  chain.initial_state = target.state();
  chain.draws.resize(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(d));
  chain.log_posterior_trace.reserve(kept);

  std::vector<std::size_t> window_accepts(d, 0);
  std::vector<std::size_t> kept_accepts(d, 0);
  std::size_t windows_done = 0;

  for (std::size_t it = 0; it < settings.n_iter; ++it) {
    const auto accepted = sweep(target, kinds, steps, rng);
    if (it < settings.burn_in) {
      if (!settings.adapt) continue;
      for (std::size_t b = 0; b < d; ++b) window_accepts[b] += accepted[b];
      if ((it + 1) % settings.adapt_window == 0) {
        ++windows_done;
        const double gain = 1.0 / std::sqrt(static_cast<double>(windows_done));
        for (std::size_t b = 0; b < d; ++b) {
          const double rate = static_cast<double>(window_accepts[b]) / settings.adapt_window;
          // Variances move twice as fast as standard deviations on the log scale.
          const double power = kinds[b] == BlockKind::positive_gamma ? 2.0 : 1.0;
          const double bound = kinds[b] == BlockKind::positive_gamma ? 1e4 : 1e3;
          steps[b] = std::clamp(steps[b] * std::exp(power * 3.0 * gain * (rate - settings.adapt_target_rate)),
                                1e-16, bound);
          window_accepts[b] = 0;
        }
      }
      continue;
    }
    const auto row = static_cast<Eigen::Index>(it - settings.burn_in);
    for (std::size_t b = 0; b < d; ++b) {
      chain.draws(row, static_cast<Eigen::Index>(b)) = target.value(b);
      kept_accepts[b] += accepted[b];
    }
    chain.log_posterior_trace.push_back(target.log_density());
  }

  chain.acceptance_rate.resize(d);
  for (std::size_t b = 0; b < d; ++b) {
    chain.acceptance_rate[b] = static_cast<double>(kept_accepts[b]) / static_cast<double>(kept);
  }
  chain.final_steps = std::move(steps);
  return chain;
}

std::vector<BlockKind> block_kinds(std::size_t p, Likelihood lik) {
  std::vector<BlockKind> kinds(2 * p, BlockKind::random_walk);
  if (lik == Likelihood::glr) kinds.push_back(BlockKind::positive_gamma);
  return kinds;
}

std::vector<double> initial_steps(std::size_t p, Likelihood lik, const ProposalConfig& proposal) {
  std::vector<double> steps = proposal.coef_step_sd;
  if (steps.empty()) steps.assign(2 * p, 0.1);
  if (lik == Likelihood::glr) steps.push_back(proposal.alpha_proposal_variance);
  return steps;
}

ParamVector initial_point(const Dataset& ds, Likelihood lik) {
  const Eigen::VectorXd beta = ds.design().colPivHouseholderQr().solve(ds.response());
  const Eigen::VectorXd resid = ds.response() - ds.design() * beta;
  const double dof = static_cast<double>(ds.n() - ds.p());
  const double variance = resid.squaredNorm() / dof;
  const double centered =
      (ds.response().array() - ds.response().mean()).matrix().squaredNorm() / static_cast<double>(ds.n());
  if (!(variance > 1e-20 * std::max(1.0, centered))) {
    throw InitializationError("degenerate variance: the response is an exact linear function of the design");
  }
  ParamVector psi;
  psi.beta.assign(beta.data(), beta.data() + beta.size());
  psi.beta_prime.assign(ds.p(), 0.0);
  psi.beta_prime[0] = lik == Likelihood::glr ? 0.5 * std::log(variance) : std::log(variance);
  psi.alpha = 1.0;
  return psi;
}

ParamVector overdisperse(const ParamVector& psi, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ParamVector out = psi;
  for (double& b : out.beta) b *= 1.0 + 0.5 * u(rng);
  for (double& b : out.beta_prime) b *= 1.0 + 0.5 * u(rng);
  return out;
}

MhStepResult mh_step(const Dataset& ds, const ParamVector& psi, const PriorSpec& prior,
                     const ProposalConfig& proposal, Rng& rng) {
  proposal.validate(ds.p());
  const std::vector<double> start = psi.flatten();
  RegressionTarget target(ds, Likelihood::glr, prior, start);
  const auto kinds = block_kinds(ds.p(), Likelihood::glr);
  const auto steps = initial_steps(ds.p(), Likelihood::glr, proposal);
  auto accepted = sweep(target, kinds, steps, rng);
  return {ParamVector::unflatten(target.state(), ds.p()), std::move(accepted)};
}

Chain run_chain(const Dataset& ds, const SamplerConfig& config, std::uint64_t seed,
                std::optional<ParamVector> start) {
  config.prior.validate();
  config.proposal.validate(ds.p());
  if (config.burn_in >= config.n_iter) throw std::invalid_argument("burn_in must be smaller than n_iter");

  Rng rng(seed);
  const ParamVector psi0 = start ? *start : overdisperse(initial_point(ds, config.likelihood), rng);
  std::vector<double> flat = psi0.flatten();
  if (config.likelihood == Likelihood::normal) flat.pop_back();

  RegressionTarget target(ds, config.likelihood, config.prior, flat);
  if (!std::isfinite(target.log_density())) {
    throw InitializationError("starting point has zero posterior density");
  }
  const auto kinds = block_kinds(ds.p(), config.likelihood);
  const RunSettings settings{config.n_iter, config.burn_in, config.proposal.adapt,
                             config.proposal.adapt_target_rate, config.proposal.adapt_window};
  Chain chain = run_blockwise(target, kinds, initial_steps(ds.p(), config.likelihood, config.proposal),
                              settings, rng);
  chain.names = parameter_names(ds.p(), config.likelihood);
  chain.seed = seed;
  chain.config_digest = config.digest();
  chain.likelihood = config.likelihood;
  return chain;
}

std::vector<Chain> run_chains(const Dataset& ds, const SamplerConfig& config, std::size_t n_chains,
                              std::uint64_t base_seed, std::size_t threads) {
  if (n_chains == 0) throw std::invalid_argument("run_chains: need at least one chain");
  std::vector<Chain> chains(n_chains);
  parallel_for(n_chains, threads, [&](std::size_t k) { chains[k] = run_chain(ds, config, base_seed + k); });
  return chains;
}

}  // namespace bglr::mcmc
