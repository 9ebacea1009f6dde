#include "bglr/report_io.hpp"

#include <sstream>

#include "bglr/csv.hpp"
#include "bglr/digest.hpp"
#include "bglr/errors.hpp"
#include "bglr/format.hpp"
#include "json.hpp"

namespace bglr::report_io {

using nlohmann::ordered_json;

std::string chains_csv(const std::vector<mcmc::Chain>& chains) {
  std::ostringstream out;
  if (chains.empty()) return {};
  out << "chain,draw";
  for (const auto& n : chains.front().names) out << "," << n;
  out << ",log_post\n";
  for (std::size_t k = 0; k < chains.size(); ++k) {
    const auto& c = chains[k];
    for (std::size_t r = 0; r < c.size(); ++r) {
      out << k + 1 << "," << r + 1;
      for (std::size_t j = 0; j < c.dimension(); ++j)
        out << "," << format_double(c.draws(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
      out << "," << format_double(c.log_posterior_trace[r]) << "\n";
    }
  }
  return out.str();
}

std::string summary_json(const baselines::BayesFit& fit, const regression::Dataset& ds, const SummaryInfo& info) {
  ordered_json j;
  j["model"] = info.model;
  j["dataset_digest"] = digest_hex(ds.digest());
  j["n"] = ds.n();
  j["n_chains"] = fit.chains.size();
  j["n_draws"] = fit.summary.n_draws;
  j["seed"] = info.seed;
  j["config_digest"] = info.config_digest;
  ordered_json params = ordered_json::array();
  for (const auto& p : fit.summary.parameters) {
    params.push_back({{"name", p.name},
                      {"mean", p.mean},
                      {"median", p.median},
                      {"sd", p.sd},
                      {"q025", p.q025},
                      {"q975", p.q975}});
  }
  j["parameters"] = params;
  if (fit.rhat) {
    ordered_json values;
    for (std::size_t i = 0; i < fit.rhat->names.size(); ++i) values[fit.rhat->names[i]] = fit.rhat->rhat[i];
    j["rhat"] = {{"split", info.split_rhat},
                 {"threshold", fit.rhat->threshold},
                 {"converged", fit.rhat->converged},
                 {"max", fit.rhat->max()},
                 {"values", values}};
  } else {
    j["rhat"] = nullptr;
  }
  j["dic"] = {{"dic", fit.dic.dic},
              {"p_dic", fit.dic.p_dic},
              {"log_lik_at_plug_in", fit.dic.log_lik_at_plug_in},
              {"mean_log_lik", fit.dic.mean_log_lik},
              {"plug_in", info.plug_in}};
  ordered_json acceptance;
  if (!fit.chains.empty()) {
    for (std::size_t b = 0; b < fit.chains.front().acceptance_rate.size(); ++b) {
      double sum = 0.0;
      for (const auto& c : fit.chains) sum += c.acceptance_rate[b];
      acceptance[fit.chains.front().names[b]] = sum / static_cast<double>(fit.chains.size());
    }
  }
  j["acceptance_rate"] = acceptance;
  return j.dump(2) + "\n";
}

SummaryRecord parse_summary(std::string_view json_text) {
  try {
    const auto j = ordered_json::parse(json_text);
    return SummaryRecord{j.at("model").get<std::string>(), j.at("dataset_digest").get<std::string>(),
                         j.at("dic").at("dic").get<double>()};
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("not a fit summary: ") + e.what());
  }
}

Comparison compare(const SummaryRecord& a, const SummaryRecord& b) {
  if (a.dataset_digest != b.dataset_digest) {
    throw std::invalid_argument("summaries refer to different datasets (" + a.dataset_digest + " vs " +
                                b.dataset_digest + ")");
  }
  Comparison c;
  c.difference = a.dic - b.dic;
  if (c.difference == 0.0) {
    c.verdict = "no preference";
  } else {
    const bool first = c.difference < 0.0;
    const SummaryRecord& winner = first ? a : b;
    c.verdict = winner.model + " preferred (" + (first ? "first" : "second") + " input, lower DIC)";
  }
  return c;
}

regression::Dataset parse_dataset(std::string_view csv_text) {
  const auto rows = csv::parse(csv_text);
  if (rows.empty()) throw ParseError("dataset file is empty");
  const auto& header = rows[0];
  if (header.size() < 2) throw ParseError("dataset needs at least one covariate and a response column", 1);
  std::size_t response = header.size() - 1;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == "y") response = c;
  const auto n = static_cast<Eigen::Index>(rows.size() - 1);
  if (n == 0) throw ParseError("dataset has no rows", 2);
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(header.size() - 1));
  Eigen::VectorXd y(n);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " columns, found " + std::to_string(rows[r].size()),
                       r + 1);
    }
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const double v = csv::to_number(rows[r][c], r + 1, c + 1);
      if (c == response) y(static_cast<Eigen::Index>(r - 1)) = v;
      else x(static_cast<Eigen::Index>(r - 1), col++) = v;
    }
  }
  return regression::Dataset::with_intercept(x, y);
}

std::vector<double> parse_column(std::string_view csv_text) {
  const auto rows = csv::parse(csv_text);
  if (rows.empty()) throw ParseError("data file is empty");
  std::vector<double> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r == 0) {
      try {
        out.push_back(csv::to_number(rows[0][0], 1, 1));
      } catch (const ParseError&) {
        // header
      }
      continue;
    }
    out.push_back(csv::to_number(rows[r][0], r + 1, 1));
  }
  if (out.empty()) throw ParseError("data file has no values");
  return out;
}

}  // namespace bglr::report_io
