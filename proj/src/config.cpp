#include "bglr/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "bglr/csv.hpp"
#include "bglr/digest.hpp"
#include "bglr/errors.hpp"
#include "bglr/format.hpp"
#include "bglr/parallel.hpp"

namespace bglr::config {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view expected) {
  throw UsageError(std::string(key) + ": expected " + std::string(expected) + ", got '" + std::string(value) + "'");
}

template <typename T>
T integer(std::string_view key, std::string_view value) {
  T v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) bad(key, value, "a non-negative integer");
  return v;
}

double real(std::string_view key, std::string_view value) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v))
    bad(key, value, "a finite number");
  return v;
}

bool boolean(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad(key, value, "true or false");
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> parts;
  while (!s.empty()) {
    const auto comma = s.find(',');
    parts.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return parts;
}

std::string b(bool v) { return v ? "true" : "false"; }

}  // namespace

const std::vector<std::string>& keys() {
  static const std::vector<std::string> k{
      "seed",           "chains",           "iterations",         "burn_in",          "threads",
      "prior.coef_variance", "prior.alpha_shape", "prior.alpha_rate", "proposal.coef_step_sd",
      "proposal.alpha_variance", "proposal.adapt", "proposal.adapt_target", "proposal.adapt_window",
      "models",         "rhat",             "split_rhat",         "plug_in",          "data",
      "regions",        "cases",            "out",                "first_day",        "last_day"};
  return k;
}

void RunConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "seed") seed = integer<std::uint64_t>(key, value);
  else if (key == "chains") chains = integer<std::size_t>(key, value);
  else if (key == "iterations") iterations = integer<std::size_t>(key, value);
  else if (key == "burn_in") burn_in = integer<std::size_t>(key, value);
  else if (key == "threads") threads = integer<std::size_t>(key, value);
  else if (key == "prior.coef_variance") prior.coef_variance = real(key, value);
  else if (key == "prior.alpha_shape") prior.alpha_shape = real(key, value);
  else if (key == "prior.alpha_rate") prior.alpha_rate = real(key, value);
  else if (key == "proposal.coef_step_sd") {
    proposal.coef_step_sd.clear();
    if (!value.empty())
      for (auto part : split(value)) proposal.coef_step_sd.push_back(real(key, part));
  } else if (key == "proposal.alpha_variance") proposal.alpha_proposal_variance = real(key, value);
  else if (key == "proposal.adapt") proposal.adapt = boolean(key, value);
  else if (key == "proposal.adapt_target") proposal.adapt_target_rate = real(key, value);
  else if (key == "proposal.adapt_window") proposal.adapt_window = integer<std::size_t>(key, value);
  else if (key == "models") {
    model_bglr = model_bnr = model_slr = false;
    for (auto m : split(value)) {
      if (m == "bglr") model_bglr = true;
      else if (m == "bnr") model_bnr = true;
      else if (m == "slr") model_slr = true;
      else bad(key, m, "a list of bglr, bnr, slr");
    }
  } else if (key == "rhat") rhat = boolean(key, value);
  else if (key == "split_rhat") split_rhat = boolean(key, value);
  else if (key == "plug_in") {
    if (value == "mean") plug_in = diagnostics::PlugIn::mean;
    else if (value == "median") plug_in = diagnostics::PlugIn::median;
    else bad(key, value, "mean or median");
  } else if (key == "data") data = value;
  else if (key == "regions") regions = value;
  else if (key == "cases") cases = value;
  else if (key == "out") out = value;
  else if (key == "first_day") first_day = integer<std::size_t>(key, value);
  else if (key == "last_day") last_day = integer<std::size_t>(key, value);
  else throw UsageError("unknown configuration key '" + std::string(key) + "'");
}

std::string RunConfig::echo() const {
  std::ostringstream o;
  std::string steps;
  for (std::size_t i = 0; i < proposal.coef_step_sd.size(); ++i)
    steps += (i ? "," : "") + format_double(proposal.coef_step_sd[i]);
  std::string models;
  for (auto [on, name] : {std::pair{model_bglr, "bglr"}, {model_bnr, "bnr"}, {model_slr, "slr"}})
    if (on) models += (models.empty() ? "" : ",") + std::string(name);
  o << "seed = " << seed << "\n"
    << "chains = " << chains << "\n"
    << "iterations = " << iterations << "\n"
    << "burn_in = " << burn_in << "\n"
    << "prior.coef_variance = " << format_double(prior.coef_variance) << "\n"
    << "prior.alpha_shape = " << format_double(prior.alpha_shape) << "\n"
    << "prior.alpha_rate = " << format_double(prior.alpha_rate) << "\n"
    << "proposal.coef_step_sd = " << steps << "\n"
    << "proposal.alpha_variance = " << format_double(proposal.alpha_proposal_variance) << "\n"
    << "proposal.adapt = " << b(proposal.adapt) << "\n"
    << "proposal.adapt_target = " << format_double(proposal.adapt_target_rate) << "\n"
    << "proposal.adapt_window = " << proposal.adapt_window << "\n"
    << "models = " << models << "\n"
    << "rhat = " << b(rhat) << "\n"
    << "split_rhat = " << b(split_rhat) << "\n"
    << "plug_in = " << (plug_in == diagnostics::PlugIn::mean ? "mean" : "median") << "\n"
    << "data = " << data << "\n"
    << "regions = " << regions << "\n"
    << "cases = " << cases << "\n"
    << "first_day = " << first_day << "\n"
    << "last_day = " << last_day << "\n";
  return o.str();
}

std::string RunConfig::digest() const { return digest_hex(digest_of(echo())); }

void RunConfig::validate() const {
  if (chains == 0) throw UsageError("chains must be at least 1");
  if (rhat && chains < 2) throw UsageError("R-hat needs at least 2 chains (got chains = 1)");
  if (iterations == 0 || burn_in >= iterations)
    throw UsageError("burn_in (" + std::to_string(burn_in) + ") must be smaller than iterations (" +
                     std::to_string(iterations) + ")");
  if (!model_bglr && !model_bnr && !model_slr) throw UsageError("no model selected");
  if (first_day == 0) throw UsageError("first_day is 1-based");
  if (last_day != 0 && last_day < first_day) throw UsageError("last_day before first_day");
  try {
    prior.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!(proposal.alpha_proposal_variance > 0.0) || !(proposal.adapt_target_rate > 0.0 && proposal.adapt_target_rate < 1.0) ||
      proposal.adapt_window == 0)
    throw UsageError("proposal settings out of range");
  for (double s : proposal.coef_step_sd)
    if (!(s > 0.0)) throw UsageError("proposal.coef_step_sd entries must be positive");
}

std::size_t RunConfig::thread_count() const { return threads == 0 ? default_thread_count() : threads; }

mcmc::SamplerConfig RunConfig::sampler(mcmc::Likelihood lik) const {
  mcmc::SamplerConfig s;
  s.prior = prior;
  s.proposal = proposal;
  s.n_iter = iterations;
  s.burn_in = burn_in;
  s.likelihood = lik;
  return s;
}

pipeline::PipelineConfig RunConfig::pipeline() const {
  pipeline::PipelineConfig p;
  p.sampler = sampler(mcmc::Likelihood::glr);
  p.n_chains = chains;
  p.seed = seed;
  p.threads = thread_count();
  p.run_slr = model_slr;
  p.run_bnr = model_bnr;
  p.run_bglr = model_bglr;
  p.plug_in = plug_in;
  p.split_rhat = split_rhat;
  return p;
}

RunConfig parse(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    try {
      base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const UsageError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return base;
}

RunConfig load(const std::string& path, RunConfig base) { return parse(csv::read_file(path), std::move(base)); }

}  // namespace bglr::config
