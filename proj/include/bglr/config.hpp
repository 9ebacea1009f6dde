#pragma once

// Run configuration: a flat "key = value" text file, overridable per key.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bglr/diagnostics.hpp"
#include "bglr/mcmc.hpp"
#include "bglr/pipeline.hpp"

namespace bglr::config {

struct RunConfig {
  mcmc::PriorSpec prior;
  mcmc::ProposalConfig proposal;
  std::size_t iterations = 20000;
  std::size_t burn_in = 10000;
  std::size_t chains = 4;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: one per available processor
  bool model_bglr = true;
  bool model_bnr = true;
  bool model_slr = true;
  bool rhat = false;  // require an R-hat report (needs chains >= 2)
  bool split_rhat = false;
  diagnostics::PlugIn plug_in = diagnostics::PlugIn::mean;
  std::string data;
  std::string regions;
  std::string cases;
  std::string out = "out";
  std::size_t first_day = 1;
  std::size_t last_day = 0;  // 0: last day in the input

  /// Sets one key. Throws UsageError for an unknown key or a malformed value.
  void set(std::string_view key, std::string_view value);

  /// Every result-affecting key, one "key = value" per line, in a fixed order.
  /// `out` and `threads` are left out: they never change the numbers.
  std::string echo() const;
  std::string digest() const;

  /// UsageError on inconsistent settings (burn_in >= iterations, chains = 0,
  /// rhat with a single chain, no model selected).
  void validate() const;

  std::size_t thread_count() const;
  mcmc::SamplerConfig sampler(mcmc::Likelihood lik) const;
  pipeline::PipelineConfig pipeline() const;
};

/// Lines "key = value"; '#' starts a comment. ParseError carries the line number.
RunConfig parse(std::string_view text, RunConfig base = {});
RunConfig load(const std::string& path, RunConfig base = {});

/// Names accepted by RunConfig::set.
const std::vector<std::string>& keys();

}  // namespace bglr::config
