#include "bglr/cli.hpp"

#include <filesystem>
#include <optional>
#include <utility>

#include "CLI11.hpp"
#include "bglr/config.hpp"
#include "bglr/csv.hpp"
#include "bglr/digest.hpp"
#include "bglr/errors.hpp"
#include "bglr/format.hpp"
#include "bglr/gld.hpp"
#include "bglr/pipeline.hpp"
#include "bglr/random.hpp"
#include "bglr/report_io.hpp"
#include "bglr/version.hpp"
#include "json.hpp"

namespace bglr::cli {

namespace fs = std::filesystem;

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

std::vector<double> number_list(const std::string& text, const std::string& what) {
  std::vector<double> v;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      v.push_back(csv::to_number(part, 0, 0));
    } catch (const ParseError&) {
      throw UsageError(what + ": '" + part + "' is not a number");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return v;
}

regression::ParamVector psi_from(const std::string& beta, const std::string& beta_prime, double alpha) {
  regression::ParamVector psi{number_list(beta, "--beta"), number_list(beta_prime, "--beta-prime"), alpha};
  if (psi.beta.size() != 2 || psi.beta_prime.size() != 2) throw UsageError("--beta and --beta-prime take two values");
  if (!psi.valid()) throw UsageError("alpha must be positive");
  return psi;
}

void write(const fs::path& path, const std::string& text) { csv::write_file(path, text); }

struct Options {
  std::string config_path;
  Overrides overrides;
};

// Registers an option that forwards its value to a configuration key.
void forward(CLI::App* app, Options& opts, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(flag, [&opts, key](const std::string& v) { opts.overrides.emplace_back(key, v); },
                                         help)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

void forward_sampler(CLI::App* app, Options& opts) {
  forward(app, opts, "--chains", "chains", "number of chains (default 4)");
  forward(app, opts, "--iterations", "iterations", "iterations per chain including burn-in (default 20000)");
  forward(app, opts, "--burn-in", "burn_in", "discarded iterations (default 10000)");
  forward(app, opts, "--plug-in", "plug_in", "DIC plug-in point: mean or median");
  app->add_flag_function("--rhat", [&opts](std::int64_t) { opts.overrides.emplace_back("rhat", "true"); },
                         "require an R-hat report (needs at least 2 chains)");
  app->add_flag_function("--split-rhat", [&opts](std::int64_t) { opts.overrides.emplace_back("split_rhat", "true"); },
                         "split each chain in half before computing R-hat");
}

config::RunConfig resolve(const Options& opts) {
  config::RunConfig cfg = opts.config_path.empty() ? config::RunConfig{} : config::load(opts.config_path);
  for (const auto& [k, v] : opts.overrides) cfg.set(k, v);
  cfg.validate();
  return cfg;
}

int cmd_gld_eval(const std::string& fn, const std::vector<double>& xs, double theta, double sigma, double alpha,
                 std::ostream& out) {
  const gld::GldParams p(theta, sigma, alpha);
  for (double x : xs) {
    double v = 0.0;
    if (fn == "pdf") v = gld::pdf(x, p);
    else if (fn == "cdf") v = gld::cdf(x, p);
    else v = gld::quantile(x, p);
    out << format_double(v) << "\n";
  }
  return 0;
}

int cmd_gld_fit(const std::string& path, std::ostream& out, std::ostream& err) {
  const auto data = report_io::parse_column(csv::read_file(path));
  const auto fit = gld::mle_fit(data);
  if (fit.status.collapse != gld::Collapse::none) {
    err << "error: MLE collapsed (" << gld::to_string(fit.status.collapse) << ")\n";
    return 1;
  }
  out << "theta," << format_double(fit.params.theta()) << "\n"
      << "sigma," << format_double(fit.params.sigma()) << "\n"
      << "alpha," << format_double(fit.params.alpha()) << "\n"
      << "log_likelihood," << format_double(fit.status.final_log_likelihood) << "\n"
      << "iterations," << fit.status.iterations << "\n"
      << "converged," << (fit.status.converged ? "true" : "false") << "\n";
  if (!fit.status.converged) {
    err << "error: MLE did not converge (gradient norm " << format_double(fit.status.gradient_norm) << ")\n";
    return 1;
  }
  return 0;
}

int cmd_fit(const config::RunConfig& cfg, const std::string& model, std::ostream& out) {
  if (cfg.data.empty()) throw UsageError("fit needs --data");
  mcmc::Likelihood lik;
  try {
    lik = mcmc::likelihood_from_string(model);
  } catch (const std::invalid_argument&) {
    throw UsageError("--model must be bglr or bnr");
  }
  const auto ds = report_io::parse_dataset(csv::read_file(cfg.data));
  const auto sampler = cfg.sampler(lik);
  const auto fit = baselines::bayes_fit(
      ds, sampler, baselines::BayesFitOptions{cfg.chains, cfg.seed, cfg.thread_count(), cfg.plug_in, cfg.split_rhat});
  const fs::path dir(cfg.out);
  write(dir / "chains.csv", report_io::chains_csv(fit.chains));
  write(dir / "summary.json",
        report_io::summary_json(fit, ds,
                                {std::string(mcmc::to_string(lik)), cfg.seed, cfg.digest(),
                                 cfg.plug_in == diagnostics::PlugIn::mean ? "mean" : "median", cfg.split_rhat}));
  write(dir / "config.txt", cfg.echo());
  out << "model=" << mcmc::to_string(lik) << " converged="
      << (fit.rhat ? (fit.rhat->converged ? "true" : "false") : "unassessed");
  if (fit.rhat) out << " max_rhat=" << format_double(fit.rhat->max());
  out << " dic=" << format_double(fit.dic.dic) << " p_dic=" << format_double(fit.dic.p_dic) << "\n";
  return 0;
}

int cmd_pipeline(const config::RunConfig& cfg, std::ostream& out, std::ostream& err) {
  pipeline::RegionTable table;
  if (!cfg.data.empty()) table = pipeline::load_regions(cfg.data);
  else if (!cfg.regions.empty() && !cfg.cases.empty()) table = pipeline::load_regions(cfg.regions, cfg.cases);
  else throw UsageError("pipeline needs --data, or --regions and --cases");
  if (table.n_days == 0) throw ParseError("input has no day columns");
  const std::size_t last = cfg.last_day == 0 ? table.n_days : cfg.last_day;
  if (last > table.n_days) throw UsageError("last_day beyond the " + std::to_string(table.n_days) + " days in the input");
  const auto pcfg = cfg.pipeline();
  const auto result = pipeline::fit_all_days(table, pcfg, cfg.first_day, last);
  const fs::path dir(cfg.out);
  write(dir / "timeseries.csv", pipeline::timeseries_csv(result));
  write(dir / "manifest.json",
        pipeline::manifest_json(result, pcfg, {cfg.echo(), cfg.digest(), digest_hex(table.digest), std::string(kVersion)}));
  write(dir / "config.txt", cfg.echo());
  std::size_t fitted = 0, unfittable = 0, failed = 0;
  for (const auto& r : result.records) {
    if (!r.fittable()) {
      ++unfittable;
      continue;
    }
    if (r.slr || r.bnr.usable() || r.bglr.usable()) ++fitted;
    for (const auto* m : {&r.bnr, &r.bglr}) failed += m->status == pipeline::ModelStatus::failed;
    failed += !r.slr_error.empty();
  }
  out << "days=" << result.records.size() << " fitted=" << fitted << " unfittable=" << unfittable
      << " model_failures=" << failed << "\n";
  if (fitted == 0) {
    err << "error: no day could be fitted\n";
    return 1;
  }
  return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, std::ostream& out) {
  const auto a = report_io::parse_summary(csv::read_file(a_path));
  const auto b = report_io::parse_summary(csv::read_file(b_path));
  const auto c = report_io::compare(a, b);
  out << "dic_a=" << format_double(a.dic) << " (" << a.model << ")\n"
      << "dic_b=" << format_double(b.dic) << " (" << b.model << ")\n"
      << "difference=" << format_double(c.difference) << "\n"
      << "verdict: " << c.verdict << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian generalized logistic regression", "bglr"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kVersion));
  Options opts;
  app.add_option("--config", opts.config_path, "configuration file (key = value lines)");
  forward(&app, opts, "--seed", "seed", "base random seed");
  forward(&app, opts, "--out", "out", "output directory");
  forward(&app, opts, "--threads", "threads", "worker threads (0: all processors)");
  app.add_option_function<std::vector<std::string>>(
      "--set",
      [&opts](const std::vector<std::string>& kvs) {
        for (const auto& kv : kvs) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
          opts.overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        }
      },
      "override any configuration key");

  // gld
  auto* gld_cmd = app.add_subcommand("gld", "type I generalized logistic distribution utilities");
  gld_cmd->require_subcommand(1);
  double theta = 0.0, sigma = 1.0, alpha = 1.0;
  std::vector<double> xs, ps;
  std::size_t n_sample = 0;
  std::string gld_data;
  std::string gld_fn;
  for (const char* fn : {"pdf", "cdf"}) {
    auto* s = gld_cmd->add_subcommand(fn, std::string("evaluate the ") + fn);
    s->add_option("--x", xs, "points")->required();
    s->callback([&gld_fn, fn] { gld_fn = fn; });
  }
  auto* q = gld_cmd->add_subcommand("quantile", "evaluate the quantile function");
  q->add_option("--p", ps, "probabilities in (0, 1)")->required();
  q->callback([&] { gld_fn = "quantile"; });
  auto* sample = gld_cmd->add_subcommand("sample", "draw a sample (stdout, or <out>/sample.csv with --out)");
  sample->add_option("--n", n_sample, "sample size")->required();
  sample->callback([&] { gld_fn = "sample"; });
  auto* gfit = gld_cmd->add_subcommand("fit", "maximum likelihood fit of a one-column CSV");
  gfit->add_option("--data", gld_data, "input file")->required();
  gfit->callback([&] { gld_fn = "fit"; });
  for (auto* s : gld_cmd->get_subcommands({})) {
    s->add_option("--theta", theta, "location")->capture_default_str();
    s->add_option("--sigma", sigma, "scale")->capture_default_str();
    s->add_option("--alpha", alpha, "shape")->capture_default_str();
  }

  // fit
  auto* fit = app.add_subcommand("fit", "Bayesian regression on a CSV dataset");
  std::string model = "bglr";
  forward(fit, opts, "--data", "data", "CSV with covariate columns and a response column named y");
  fit->add_option("--model", model, "bglr or bnr")->capture_default_str();
  forward_sampler(fit, opts);

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "daily power-law fits over a regional case table");
  forward(pipe, opts, "--data", "data", "combined file Region,Population,Area,Day1,...");
  forward(pipe, opts, "--regions", "regions", "regions file Region,Population,Area");
  forward(pipe, opts, "--cases", "cases", "cases file Region,Day1,...");
  forward(pipe, opts, "--first-day", "first_day", "first day (1-based)");
  forward(pipe, opts, "--last-day", "last_day", "last day (default: all)");
  forward(pipe, opts, "--models", "models", "comma list of bglr, bnr, slr");
  forward_sampler(pipe, opts);

  // compare
  auto* cmp = app.add_subcommand("compare", "DIC difference of two fit summaries (first minus second)");
  std::string sum_a, sum_b;
  cmp->add_option("summary_a", sum_a, "summary.json")->required();
  cmp->add_option("summary_b", sum_b, "summary.json")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "synthetic data from known parameters");
  sim->require_subcommand(1);
  std::string beta = "2,0.5", beta_prime = "-1,0.3", alpha_list = "2";
  double sim_alpha = 2.0, x_min = 0.0, x_max = 4.0;
  std::size_t sim_n = 337, n_regions = 337, n_days = 10;
  std::vector<std::size_t> zero_days;
  auto* sim_ds = sim->add_subcommand("dataset", "one regression dataset (<out>/dataset.csv)");
  sim_ds->add_option("--n", sim_n, "observations")->capture_default_str();
  sim_ds->add_option("--alpha", sim_alpha, "shape")->capture_default_str();
  sim_ds->add_option("--x-min", x_min, "covariate lower bound")->capture_default_str();
  sim_ds->add_option("--x-max", x_max, "covariate upper bound")->capture_default_str();
  auto* sim_corpus = sim->add_subcommand("corpus", "regional case table (<out>/regions.csv, <out>/cases.csv)");
  sim_corpus->add_option("--n-regions", n_regions, "regions")->capture_default_str();
  sim_corpus->add_option("--days", n_days, "days")->capture_default_str();
  sim_corpus->add_option("--zero-days", zero_days, "days with no cases anywhere")->delimiter(',');
  sim_corpus->add_option("--alpha", alpha_list, "shape per block of days, e.g. 3,0.3")->capture_default_str();
  for (auto* s : {sim_ds, sim_corpus}) {
    s->add_option("--beta", beta, "location coefficients b0,b1")->capture_default_str();
    s->add_option("--beta-prime", beta_prime, "log-scale coefficients b0,b1")->capture_default_str();
  }

  std::vector<const char*> argv{"bglr"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gld_cmd->parsed()) {
      if (gld_fn == "pdf" || gld_fn == "cdf") return cmd_gld_eval(gld_fn, xs, theta, sigma, alpha, out);
      if (gld_fn == "quantile") return cmd_gld_eval(gld_fn, ps, theta, sigma, alpha, out);
      const auto cfg = resolve(opts);
      if (gld_fn == "fit") return cmd_gld_fit(gld_data, out, err);
      const auto draws = gld::sample(gld::GldParams(theta, sigma, alpha), n_sample, cfg.seed);
      std::string text = "x\n";
      for (double v : draws) text += format_double(v) + "\n";
      const bool to_file = std::any_of(opts.overrides.begin(), opts.overrides.end(),
                                       [](const auto& kv) { return kv.first == "out"; });
      if (to_file) write(fs::path(cfg.out) / "sample.csv", text);
      else out << text;
      return 0;
    }
    if (fit->parsed()) return cmd_fit(resolve(opts), model, out);
    if (pipe->parsed()) return cmd_pipeline(resolve(opts), out, err);
    if (cmp->parsed()) return cmd_compare(sum_a, sum_b, out);
    if (sim->parsed()) {
      const auto cfg = resolve(opts);
      const fs::path dir(cfg.out);
      if (sim_ds->parsed()) {
        if (sim_n < 3) throw UsageError("--n must be at least 3");
        if (!(x_max > x_min)) throw UsageError("--x-max must exceed --x-min");
        const auto psi = psi_from(beta, beta_prime, sim_alpha);
        Rng rng(mix_seed(cfg.seed, 0));
        std::uniform_real_distribution<double> ux(x_min, x_max);
        std::vector<double> x(sim_n);
        for (double& v : x) v = ux(rng);
        const auto day = pipeline::simulate_day(psi, x, mix_seed(cfg.seed, 1));
        std::string text = "x,y\n";
        for (std::size_t i = 0; i < sim_n; ++i)
          text += format_double(x[i]) + "," + format_double(day.dataset->response()(static_cast<Eigen::Index>(i))) + "\n";
        write(dir / "dataset.csv", text);
        nlohmann::ordered_json truth{{"beta", psi.beta}, {"beta_prime", psi.beta_prime}, {"alpha", psi.alpha},
                                     {"seed", cfg.seed}, {"n", sim_n}};
        write(dir / "truth.json", truth.dump(2) + "\n");
        out << "wrote " << (dir / "dataset.csv").string() << "\n";
        return 0;
      }
      if (n_days == 0 || n_regions < 4) throw UsageError("need --days >= 1 and --n-regions >= 4");
      const auto alphas = number_list(alpha_list, "--alpha");
      pipeline::CorpusSpec spec;
      spec.n_regions = n_regions;
      spec.zero_days = zero_days;
      spec.seed = cfg.seed;
      std::string truth = "day,beta0,beta1,bp0,bp1,alpha\n";
      for (std::size_t d = 0; d < n_days; ++d) {
        const double a = alphas[std::min(alphas.size() - 1, d * alphas.size() / n_days)];
        spec.psi_for_day.push_back(psi_from(beta, beta_prime, a));
        const auto& p = spec.psi_for_day.back();
        truth += std::to_string(d + 1) + "," + format_double(p.beta[0]) + "," + format_double(p.beta[1]) + "," +
                 format_double(p.beta_prime[0]) + "," + format_double(p.beta_prime[1]) + "," + format_double(a) + "\n";
      }
      const auto regions = pipeline::generate_corpus(spec);
      pipeline::write_regions_csv(regions, dir / "regions.csv");
      pipeline::write_cases_csv(regions, dir / "cases.csv");
      write(dir / "truth.csv", truth);
      out << "wrote " << (dir / "regions.csv").string() << " and " << (dir / "cases.csv").string() << "\n";
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace bglr::cli
