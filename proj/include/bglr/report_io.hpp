#pragma once

// File formats of the command-line tool: chain dumps, fit summaries and
// regression datasets.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bglr/baselines.hpp"
#include "bglr/regression.hpp"

namespace bglr::report_io {

/// Columns chain,draw,<parameter names>,log_post; one row per retained draw.
std::string chains_csv(const std::vector<mcmc::Chain>& chains);

struct SummaryInfo {
  std::string model;  // "bglr" or "bnr"
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string plug_in = "mean";
  bool split_rhat = false;
};

std::string summary_json(const baselines::BayesFit& fit, const regression::Dataset& ds, const SummaryInfo& info);

/// The fields of a summary file that model comparison needs.
struct SummaryRecord {
  std::string model;
  std::string dataset_digest;
  double dic = 0.0;
};

/// ParseError when the text is not a summary written by summary_json.
SummaryRecord parse_summary(std::string_view json_text);

struct Comparison {
  double difference = 0.0;  // dic(a) - dic(b)
  std::string verdict;      // "no preference", or which input has the lower DIC
};

/// std::invalid_argument when the summaries refer to different datasets.
Comparison compare(const SummaryRecord& a, const SummaryRecord& b);

/// CSV with a header row. The column named "y" (or else the last column) is
/// the response; every other column is a covariate. An intercept is added.
regression::Dataset parse_dataset(std::string_view csv_text);

/// First column of a CSV, skipping a non-numeric header.
std::vector<double> parse_column(std::string_view csv_text);

}  // namespace bglr::report_io
