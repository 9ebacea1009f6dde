#include "bglr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "bglr/csv.hpp"
#include "bglr/digest.hpp"
#include "bglr/errors.hpp"
#include "bglr/format.hpp"
#include "bglr/gld.hpp"
#include "bglr/parallel.hpp"
#include "bglr/random.hpp"
#include "bglr/version.hpp"

namespace bglr::pipeline {

namespace {

constexpr std::size_t kCoefficients = 2;  // intercept + log10 density

bool header_is(const std::string& cell, std::string_view prefix) {
  if (cell.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(cell[i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

void check_width(const csv::Row& row, std::size_t expected, std::size_t line) {
  if (row.size() != expected) {
    throw ParseError("expected " + std::to_string(expected) + " columns, found " + std::to_string(row.size()), line,
                     std::min(row.size(), expected) + 1);
  }
}

std::vector<csv::Row> rows_of(std::string_view text, std::string_view what) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw ParseError(std::string(what) + " file is empty");
  return rows;
}

std::string checked_name(const csv::Row& row, std::size_t line) {
  if (row[0].empty()) throw ParseError("empty region name", line, 1);
  return row[0];
}

void read_region_columns(const csv::Row& row, std::size_t line, RegionRecord& rec) {
  rec.population = csv::to_number(row[1], line, 2);
  if (!(rec.population > 0.0)) throw ParseError("region '" + rec.region + "': population must be positive", line, 2);
  rec.area_hectares = csv::to_number(row[2], line, 3);
  if (!(rec.area_hectares > 0.0)) throw ParseError("region '" + rec.region + "': area must be positive", line, 3);
}

void read_cases(const csv::Row& row, std::size_t first_col, std::size_t line, RegionRecord& rec) {
  rec.daily_cases.reserve(row.size() - first_col);
  for (std::size_t c = first_col; c < row.size(); ++c) {
    const double v = csv::to_number(row[c], line, c + 1);
    if (v < 0.0) throw ParseError("region '" + rec.region + "': negative case count", line, c + 1);
    rec.daily_cases.push_back(v);
  }
}

void check_region_header(const csv::Row& h) {
  if (h.size() < 3 || !header_is(h[0], "Region") || !header_is(h[1], "Population") || !header_is(h[2], "Area")) {
    throw ParseError("header must start with Region,Population,Area", 1, 1);
  }
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

const std::vector<std::string>& bnr_params() {
  static const std::vector<std::string> names{"beta0", "beta1", "bp0", "bp1"};
  return names;
}
const std::vector<std::string>& bglr_params() {
  static const std::vector<std::string> names{"beta0", "beta1", "bp0", "bp1", "alpha"};
  return names;
}
constexpr const char* kStats[] = {"mean", "median", "sd", "q025", "q975"};

void append_bayes(std::vector<std::string>& cells, const BayesOutcome& m, const std::vector<std::string>& params) {
  cells.push_back(to_string(m.status));
  cells.push_back(opt(m.max_rhat));
  cells.push_back(m.dic ? format_double(m.dic->dic) : "");
  cells.push_back(m.dic ? format_double(m.dic->p_dic) : "");
  for (const auto& p : params) {
    if (!m.summary) {
      cells.insert(cells.end(), std::size(kStats), "");
      continue;
    }
    const auto& s = m.summary->at(p);
    for (double v : {s.mean, s.median, s.sd, s.q025, s.q975}) cells.push_back(format_double(v));
  }
}

BayesOutcome run_bayes(const Dataset& ds, const PipelineConfig& config, mcmc::Likelihood lik, std::uint64_t seed) {
  BayesOutcome out;
  try {
    mcmc::SamplerConfig sampler = config.sampler;
    sampler.likelihood = lik;
    auto fit = baselines::bayes_fit(ds, sampler,
                                    baselines::BayesFitOptions{config.n_chains, seed, 1, config.plug_in, config.split_rhat});
    if (fit.rhat) {
      out.max_rhat = fit.rhat->max();
      out.status = fit.rhat->converged ? ModelStatus::converged : ModelStatus::not_converged;
    } else {
      out.status = ModelStatus::unassessed;
    }
    if (out.status != ModelStatus::not_converged) {
      out.summary = std::move(fit.summary);
      out.dic = std::move(fit.dic);
    }
  } catch (const std::exception& e) {
    out = BayesOutcome{};
    out.status = ModelStatus::failed;
    out.error = e.what();
  }
  return out;
}

}  // namespace

RegionTable parse_combined(std::string_view text) {
  const auto rows = rows_of(text, "regions");
  check_region_header(rows[0]);
  const std::size_t width = rows[0].size();
  RegionTable table;
  table.n_days = width - 3;
  table.columns = width;
  std::map<std::string, std::size_t> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t line = r + 1;
    check_width(rows[r], width, line);
    RegionRecord rec;
    rec.region = checked_name(rows[r], line);
    if (!seen.emplace(rec.region, line).second) throw ParseError("duplicate region '" + rec.region + "'", line, 1);
    read_region_columns(rows[r], line, rec);
    read_cases(rows[r], 3, line, rec);
    table.regions.push_back(std::move(rec));
  }
  table.rows = rows.size() - 1;
  table.digest = digest_of(text);
  return table;
}

RegionTable parse_split(std::string_view regions_text, std::string_view cases_text) {
  const auto rrows = rows_of(regions_text, "regions");
  check_region_header(rrows[0]);
  if (rrows[0].size() != 3) throw ParseError("regions header must be Region,Population,Area", 1, 4);
  const auto crows = rows_of(cases_text, "cases");
  if (crows[0].empty() || !header_is(crows[0][0], "Region")) throw ParseError("cases header must start with Region", 1, 1);
  const std::size_t width = crows[0].size();

  RegionTable table;
  table.n_days = width - 1;
  table.columns = std::max<std::size_t>(3, width);
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 1; r < rrows.size(); ++r) {
    const std::size_t line = r + 1;
    check_width(rrows[r], 3, line);
    RegionRecord rec;
    rec.region = checked_name(rrows[r], line);
    if (!index.emplace(rec.region, table.regions.size()).second)
      throw ParseError("duplicate region '" + rec.region + "' in regions file", line, 1);
    read_region_columns(rrows[r], line, rec);
    table.regions.push_back(std::move(rec));
  }
  std::vector<bool> filled(table.regions.size(), false);
  for (std::size_t r = 1; r < crows.size(); ++r) {
    const std::size_t line = r + 1;
    check_width(crows[r], width, line);
    const std::string name = checked_name(crows[r], line);
    const auto it = index.find(name);
    if (it == index.end()) throw ParseError("cases file: region '" + name + "' not in regions file", line, 1);
    if (filled[it->second]) throw ParseError("duplicate region '" + name + "' in cases file", line, 1);
    filled[it->second] = true;
    read_cases(crows[r], 1, line, table.regions[it->second]);
  }
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (!filled[i]) throw ParseError("cases file: no row for region '" + table.regions[i].region + "'");
  }
  table.rows = table.regions.size();
  Fnv1a h;
  h.update(regions_text);
  h.update(std::uint64_t{0});
  h.update(cases_text);
  table.digest = h.value();
  return table;
}

RegionTable load_regions(const std::filesystem::path& combined) {
  return parse_combined(csv::read_file(combined));
}

RegionTable load_regions(const std::filesystem::path& regions, const std::filesystem::path& cases) {
  return parse_split(csv::read_file(regions), csv::read_file(cases));
}

void write_regions_csv(const std::vector<RegionRecord>& regions, const std::filesystem::path& path) {
  std::string out = "Region,Population,Area\n";
  for (const auto& r : regions) {
    out += csv::escape(r.region) + "," + format_double(r.population) + "," + format_double(r.area_hectares) + "\n";
  }
  csv::write_file(path, out);
}

void write_cases_csv(const std::vector<RegionRecord>& regions, const std::filesystem::path& path) {
  const std::size_t days = regions.empty() ? 0 : regions.front().daily_cases.size();
  std::string out = "Region";
  for (std::size_t d = 1; d <= days; ++d) out += ",Day" + std::to_string(d);
  out += "\n";
  for (const auto& r : regions) {
    out += csv::escape(r.region);
    for (double c : r.daily_cases) out += "," + format_double(c);
    out += "\n";
  }
  csv::write_file(path, out);
}

DayDataset build_day_dataset(const RegionTable& table, std::size_t day_index) {
  if (day_index < 1 || day_index > table.n_days) {
    throw std::out_of_range("day " + std::to_string(day_index) + " outside 1.." + std::to_string(table.n_days));
  }
  DayDataset day;
  day.day_index = day_index;
  std::vector<double> x, y;
  for (const auto& r : table.regions) {
    const double cases = r.daily_cases[day_index - 1];
    if (cases > 0.0) {
      x.push_back(std::log10(r.population / r.area_hectares));
      y.push_back(std::log10(cases / r.area_hectares));
      day.included_regions.push_back(r.region);
    } else {
      ++day.n_excluded_zero;
    }
  }
  day.n_included = x.size();
  if (day.n_included < kCoefficients + 2) {
    day.unfittable_reason = "only " + std::to_string(day.n_included) + " regions with cases (need " +
                            std::to_string(kCoefficients + 2) + ")";
    return day;
  }
  try {
    day.dataset = Dataset::simple(x, y);
  } catch (const std::invalid_argument& e) {
    day.unfittable_reason = e.what();
  }
  return day;
}

DayDataset simulate_day(const ParamVector& true_psi, std::span<const double> x_values, std::uint64_t seed) {
  if (true_psi.p() != kCoefficients || !true_psi.valid()) {
    throw std::invalid_argument("simulate_day: psi must be valid with two coefficients per predictor");
  }
  Rng rng(seed);
  std::vector<double> y(x_values.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double theta = true_psi.beta[0] + true_psi.beta[1] * x_values[i];
    const double sigma = std::exp(std::clamp(true_psi.beta_prime[0] + true_psi.beta_prime[1] * x_values[i],
                                             -regression::kLogScaleLimit, regression::kLogScaleLimit));
    y[i] = gld::draw(gld::GldParams(theta, sigma, true_psi.alpha), rng);
  }
  DayDataset day;
  day.dataset = Dataset::simple(x_values, y);
  day.n_included = y.size();
  day.true_psi = true_psi;
  day.seed = seed;
  return day;
}

std::string to_string(ModelStatus s) {
  switch (s) {
    case ModelStatus::not_run: return "not_run";
    case ModelStatus::converged: return "converged";
    case ModelStatus::not_converged: return "not_converged";
    case ModelStatus::unassessed: return "unassessed";
    case ModelStatus::failed: return "failed";
  }
  return "unknown";
}

std::uint64_t day_seed(std::uint64_t base, std::size_t day_index) { return mix_seed(base, day_index); }

DayFitRecord fit_day(const DayDataset& day, const PipelineConfig& config) {
  DayFitRecord r;
  r.day_index = day.day_index;
  r.n_included = day.n_included;
  r.n_excluded_zero = day.n_excluded_zero;
  if (!day.fittable()) {
    r.unfittable_reason = day.unfittable_reason.empty() ? "no dataset" : day.unfittable_reason;
    return r;
  }
  const Dataset& ds = *day.dataset;
  if (config.run_slr) {
    try {
      r.slr = baselines::slr_fit(ds);
    } catch (const std::exception& e) {
      r.slr_error = e.what();
    }
  }
  const std::uint64_t seed = day_seed(config.seed, day.day_index);
  if (config.run_bnr) r.bnr = run_bayes(ds, config, mcmc::Likelihood::normal, mix_seed(seed, 1));
  if (config.run_bglr) r.bglr = run_bayes(ds, config, mcmc::Likelihood::glr, mix_seed(seed, 2));
  if (r.bnr.usable() && r.bglr.usable()) {
    r.dic_difference = diagnostics::dic_difference(*r.bnr.dic, *r.bglr.dic);
    r.delta_beta0 = r.bglr.summary->at("beta0").mean - r.bnr.summary->at("beta0").mean;
    r.delta_beta1 = r.bglr.summary->at("beta1").mean - r.bnr.summary->at("beta1").mean;
  }
  return r;
}

PipelineResult fit_all_days(const RegionTable& table, const PipelineConfig& config, std::size_t first_day,
                            std::size_t last_day) {
  if (first_day < 1 || first_day > last_day || last_day > table.n_days) {
    throw std::out_of_range("day range " + std::to_string(first_day) + ".." + std::to_string(last_day) +
                            " outside 1.." + std::to_string(table.n_days));
  }
  PipelineResult result;
  result.first_day = first_day;
  result.last_day = last_day;
  result.records.resize(last_day - first_day + 1);
  parallel_for(result.records.size(), config.threads, [&](std::size_t i) {
    result.records[i] = fit_day(build_day_dataset(table, first_day + i), config);
  });
  return result;
}

std::vector<std::string> timeseries_columns() {
  std::vector<std::string> cols{"day",       "n_included",   "n_excluded_zero", "fittable",
                                "slr_beta0", "slr_beta1",    "slr_se_beta0",    "slr_se_beta1",
                                "slr_residual_variance"};
  const auto add = [&](const std::string& model, const std::vector<std::string>& params) {
    for (const char* c : {"status", "max_rhat", "dic", "p_dic"}) cols.push_back(model + "_" + c);
    for (const auto& p : params)
      for (const char* s : kStats) cols.push_back(model + "_" + p + "_" + s);
  };
  add("bnr", bnr_params());
  add("bglr", bglr_params());
  for (const char* c : {"delta_beta0", "delta_beta1", "dic_difference"}) cols.emplace_back(c);
  return cols;
}

std::string timeseries_csv(const PipelineResult& result) {
  std::ostringstream out;
  const auto cols = timeseries_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : result.records) {
    std::vector<std::string> cells{std::to_string(r.day_index), std::to_string(r.n_included),
                                   std::to_string(r.n_excluded_zero), r.fittable() ? "1" : "0"};
    if (r.slr) {
      for (double v : {r.slr->beta[0], r.slr->beta[1], r.slr->standard_errors[0], r.slr->standard_errors[1],
                       r.slr->residual_variance})
        cells.push_back(format_double(v));
    } else {
      cells.insert(cells.end(), 5, "");
    }
    append_bayes(cells, r.bnr, bnr_params());
    append_bayes(cells, r.bglr, bglr_params());
    cells.push_back(opt(r.delta_beta0));
    cells.push_back(opt(r.delta_beta1));
    cells.push_back(opt(r.dic_difference));
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << "\n";
  }
  return out.str();
}

std::string manifest_json(const PipelineResult& result, const PipelineConfig& config, const ManifestInfo& info) {
  using nlohmann::ordered_json;
  ordered_json m;
  m["software"] = {{"name", "bglr"}, {"version", info.version.empty() ? std::string(kVersion) : info.version}};
  m["config"] = {{"digest", info.config_digest}, {"sampler", config.sampler.canonical()}, {"text", info.config_text}};
  m["input_digest"] = info.input_digest;
  m["units"] = {{"area", "hectares, as given in the input"},
                {"x", "log10(population / area)"},
                {"y", "log10(cases / area)"}};
  ordered_json seeds = ordered_json::array();
  ordered_json fitted = ordered_json::array(), unfittable = ordered_json::array(), failed = ordered_json::array(),
               not_converged = ordered_json::array();
  for (const auto& r : result.records) {
    seeds.push_back({{"day", r.day_index}, {"seed", day_seed(config.seed, r.day_index)}});
    if (!r.fittable()) {
      unfittable.push_back({{"day", r.day_index},
                            {"n_included", r.n_included},
                            {"n_excluded_zero", r.n_excluded_zero},
                            {"reason", r.unfittable_reason}});
      continue;
    }
    bool any = false;
    if (!r.slr_error.empty()) failed.push_back({{"day", r.day_index}, {"model", "slr"}, {"error", r.slr_error}});
    any = any || r.slr.has_value();
    for (const auto& [name, m_out] : {std::pair<const char*, const BayesOutcome*>{"bnr", &r.bnr}, {"bglr", &r.bglr}}) {
      if (m_out->status == ModelStatus::failed)
        failed.push_back({{"day", r.day_index}, {"model", name}, {"error", m_out->error}});
      if (m_out->status == ModelStatus::not_converged)
        not_converged.push_back({{"day", r.day_index}, {"model", name}, {"max_rhat", *m_out->max_rhat}});
      any = any || m_out->usable();
    }
    if (any) fitted.push_back(r.day_index);
  }
  m["seeds"] = {{"base", config.seed}, {"days", seeds}};
  m["days"] = {{"first", result.first_day},   {"last", result.last_day},
               {"records", result.records.size()}, {"fitted", fitted},
               {"unfittable", unfittable},    {"failed", failed},
               {"not_converged", not_converged}};
  return m.dump(2) + "\n";
}

std::vector<RegionRecord> generate_corpus(const CorpusSpec& spec) {
  if (spec.psi_for_day.empty()) throw std::invalid_argument("generate_corpus: no days");
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> log_area(3.0, 4.0), log_density(spec.log10_density_min, spec.log10_density_max);
  std::vector<RegionRecord> regions(spec.n_regions);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    auto& r = regions[i];
    char name[16];
    std::snprintf(name, sizeof name, "R%04zu", i + 1);
    r.region = name;
    r.area_hectares = std::round(std::pow(10.0, log_area(rng)) * 100.0) / 100.0;
    r.population = std::max(1.0, std::round(std::pow(10.0, log_density(rng)) * r.area_hectares));
  }
  for (std::size_t d = 0; d < spec.psi_for_day.size(); ++d) {
    const bool zero = std::find(spec.zero_days.begin(), spec.zero_days.end(), d + 1) != spec.zero_days.end();
    std::vector<double> x(regions.size());
    for (std::size_t i = 0; i < regions.size(); ++i) x[i] = std::log10(regions[i].population / regions[i].area_hectares);
    const DayDataset sim = simulate_day(spec.psi_for_day[d], x, mix_seed(spec.seed, d + 1));
    for (std::size_t i = 0; i < regions.size(); ++i) {
      double cases = 0.0;
      if (!zero) {
        const double y = sim.dataset->response()(static_cast<Eigen::Index>(i));
        cases = std::round(std::pow(10.0, std::min(y, 12.0)) * regions[i].area_hectares);
      }
      regions[i].daily_cases.push_back(cases);
    }
  }
  return regions;
}

}  // namespace bglr::pipeline
