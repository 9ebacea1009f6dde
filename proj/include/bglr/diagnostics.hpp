#pragma once

// Posterior summaries, the Gelman-Rubin potential scale reduction factor, and
// the deviance information criterion.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bglr/mcmc.hpp"

namespace bglr::diagnostics {

using mcmc::Chain;
using regression::Dataset;
using regression::ParamVector;

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

struct PosteriorSummary {
  std::vector<ParameterSummary> parameters;
  std::size_t n_draws = 0;

  /// Throws std::out_of_range for an unknown name.
  const ParameterSummary& at(const std::string& name) const;
};

/// Quantile of sorted data by linear interpolation between order statistics:
/// h = (n - 1) prob, result = x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h]).
/// (R's type 7; for 1..10000 the 2.5% point is 250.975.)
double interpolated_quantile(std::span<const double> sorted, double prob);

/// Pools all chains. sd uses the n - 1 denominator. Throws std::invalid_argument
/// when there are no chains, fewer than two draws, or mismatched columns.
PosteriorSummary summarize(std::span<const Chain> chains);

struct RhatReport {
  std::vector<std::string> names;
  std::vector<double> rhat;
  std::size_t n_chains = 0;
  double threshold = 1.1;
  bool converged = false;  // every rhat below threshold

  double max() const;
};

/// Classical R-hat, sqrt(((n-1)/n W + B/n) / W). With split = true each chain
/// is halved first. Requires >= 2 chains of equal length >= 10.
RhatReport gelman_rubin(std::span<const Chain> chains, bool split = false, double threshold = 1.1);

/// Non-finite log-likelihood at the DIC plug-in point.
class DicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PlugIn { mean, median };

struct DicResult {
  double p_dic = 0.0;  // 2 [ln f(y | psi_hat) - mean_t ln f(y | psi_t)]
  double dic = 0.0;    // -2 ln f(y | psi_hat) + 2 p_dic
  ParamVector plug_in_psi;
  double log_lik_at_plug_in = 0.0;
  double mean_log_lik = 0.0;
  std::uint64_t dataset_digest = 0;
  std::string model;
};

using ModelLogLik = std::function<double(const Dataset&, const ParamVector&)>;

/// Chains must all share the layout (beta, beta_prime[, alpha]).
DicResult dic(std::span<const Chain> chains, const Dataset& ds, const ModelLogLik& model_loglik,
              PlugIn plug_in = PlugIn::mean, std::string model = {});

/// a.dic - b.dic. With a = BNR and b = BGLR a positive value prefers BGLR.
/// Throws std::invalid_argument when the results come from different datasets.
double dic_difference(const DicResult& a, const DicResult& b);

/// Draws of one chain row as a ParamVector.
ParamVector draw_at(const Chain& chain, std::size_t row);

}  // namespace bglr::diagnostics
