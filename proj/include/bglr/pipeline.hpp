#pragma once

// Daily power-law scaling workflow: regional counts -> log10 densities ->
// SLR, BNR and BGLR fits per day -> time-series export.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bglr/baselines.hpp"
#include "bglr/mcmc.hpp"
#include "bglr/regression.hpp"

namespace bglr::pipeline {

using regression::Dataset;
using regression::ParamVector;

struct RegionRecord {
  std::string region;
  double population = 0.0;
  double area_hectares = 0.0;
  std::vector<double> daily_cases;
};

struct RegionTable {
  std::vector<RegionRecord> regions;
  std::size_t n_days = 0;
  std::size_t rows = 0;     // data rows read
  std::size_t columns = 0;  // columns per row of the widest input file
  std::uint64_t digest = 0;

  std::size_t size() const noexcept { return regions.size(); }
};

/// One CSV row per region: Region,Population,Area,Day1,...,DayN.
RegionTable parse_combined(std::string_view text);
/// Regions file (Region,Population,Area) and cases file (Region,Day1,...,DayN).
/// The region columns must match one to one (order may differ).
RegionTable parse_split(std::string_view regions_text, std::string_view cases_text);

RegionTable load_regions(const std::filesystem::path& combined);
RegionTable load_regions(const std::filesystem::path& regions, const std::filesystem::path& cases);

void write_regions_csv(const std::vector<RegionRecord>& regions, const std::filesystem::path& path);
void write_cases_csv(const std::vector<RegionRecord>& regions, const std::filesystem::path& path);

struct DayDataset {
  std::size_t day_index = 0;
  std::optional<Dataset> dataset;  // empty when unfittable
  std::size_t n_included = 0;
  std::size_t n_excluded_zero = 0;
  std::string unfittable_reason;  // empty when fittable
  std::vector<std::string> included_regions;
  std::optional<ParamVector> true_psi;  // set by simulate_day
  std::optional<std::uint64_t> seed;

  bool fittable() const noexcept { return dataset.has_value(); }
};

/// x = log10(population / area), y = log10(cases / area) for regions with cases > 0.
/// day_index is 1-based; std::out_of_range outside [1, n_days].
DayDataset build_day_dataset(const RegionTable& table, std::size_t day_index);

/// y_i drawn from GLD(x_i' beta, exp(x_i' beta_prime), alpha) with an intercept added to x.
DayDataset simulate_day(const ParamVector& true_psi, std::span<const double> x_values, std::uint64_t seed);

struct PipelineConfig {
  mcmc::SamplerConfig sampler;
  std::size_t n_chains = 4;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  bool run_slr = true;
  bool run_bnr = true;
  bool run_bglr = true;
  diagnostics::PlugIn plug_in = diagnostics::PlugIn::mean;
  bool split_rhat = false;
};

enum class ModelStatus { not_run, converged, not_converged, unassessed, failed };
std::string to_string(ModelStatus s);

struct BayesOutcome {
  ModelStatus status = ModelStatus::not_run;
  std::string error;
  std::optional<double> max_rhat;
  // Present only when status is converged or unassessed (single chain).
  std::optional<diagnostics::PosteriorSummary> summary;
  std::optional<diagnostics::DicResult> dic;

  bool usable() const noexcept { return summary.has_value(); }
};

struct DayFitRecord {
  std::size_t day_index = 0;
  std::size_t n_included = 0;
  std::size_t n_excluded_zero = 0;
  std::string unfittable_reason;
  std::optional<baselines::SlrFit> slr;
  std::string slr_error;
  BayesOutcome bnr;
  BayesOutcome bglr;
  std::optional<double> dic_difference;  // DIC(BNR) - DIC(BGLR)
  std::optional<double> delta_beta0;     // BGLR - BNR posterior means
  std::optional<double> delta_beta1;

  bool fittable() const noexcept { return unfittable_reason.empty(); }
};

std::uint64_t day_seed(std::uint64_t base, std::size_t day_index);

/// Runs the enabled models on one day. Model failures are recorded, never thrown.
DayFitRecord fit_day(const DayDataset& day, const PipelineConfig& config);

struct PipelineResult {
  std::vector<DayFitRecord> records;
  std::size_t first_day = 0;
  std::size_t last_day = 0;
};

/// Days first_day..last_day (1-based, inclusive), processed independently on config.threads workers.
PipelineResult fit_all_days(const RegionTable& table, const PipelineConfig& config, std::size_t first_day,
                            std::size_t last_day);

/// Header and rows of the time-series export. Missing values are empty cells.
std::vector<std::string> timeseries_columns();
std::string timeseries_csv(const PipelineResult& result);

struct ManifestInfo {
  std::string config_text;  // echoed run configuration
  std::string config_digest;
  std::string input_digest;
  std::string version;
};

std::string manifest_json(const PipelineResult& result, const PipelineConfig& config, const ManifestInfo& info);

/// Synthetic regions with known per-day parameters. Day d uses psi_for_day[d - 1];
/// days listed in zero_days report no cases anywhere.
struct CorpusSpec {
  std::size_t n_regions = 337;
  std::vector<ParamVector> psi_for_day;
  std::vector<std::size_t> zero_days;
  double log10_density_min = 0.0;  // people per hectare
  double log10_density_max = 2.0;
  std::uint64_t seed = 1;
};

std::vector<RegionRecord> generate_corpus(const CorpusSpec& spec);

}  // namespace bglr::pipeline
