#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "bglr/baselines.hpp"
#include "bglr/diagnostics.hpp"
#include "bglr/gld.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace bglr;
using namespace bglr::diagnostics;

namespace {

Chain make_chain(const Eigen::MatrixXd& draws) {
  Chain c;
  c.draws = draws;
  for (Eigen::Index j = 0; j < draws.cols(); ++j) c.names.push_back("v" + std::to_string(j));
  c.log_posterior_trace.assign(static_cast<std::size_t>(draws.rows()), 0.0);
  c.acceptance_rate.assign(static_cast<std::size_t>(draws.cols()), 0.5);
  return c;
}

Chain normal_chain(std::mt19937_64& rng, std::size_t n, std::size_t d, double center) {
  std::normal_distribution<double> z(center, 1.0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = z(rng);
  return make_chain(m);
}

// Independent DIC: plain loops, explicit product density through gld::log_pdf.
double dic_oracle(const std::vector<Chain>& chains, const regression::Dataset& ds) {
  const auto ll = [&](const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      const double x = ds.design()(static_cast<Eigen::Index>(i), 1);
      const double theta = f[0] + f[1] * x;
      const double sigma = std::exp(f[2] + f[3] * x);
      s += std::log(oracle::gld_pdf_naive(ds.response()(static_cast<Eigen::Index>(i)), theta, sigma, f[4]));
    }
    return s;
  };
  std::vector<double> mean(5, 0.0);
  double sum_ll = 0.0;
  std::size_t count = 0;
  for (const auto& c : chains) {
    for (Eigen::Index r = 0; r < c.draws.rows(); ++r) {
      std::vector<double> f(5);
      for (int j = 0; j < 5; ++j) {
        f[j] = c.draws(r, j);
        mean[j] += f[j];
      }
      sum_ll += ll(f);
      ++count;
    }
  }
  for (double& m : mean) m /= static_cast<double>(count);
  const double at_mean = ll(mean);
  const double pd = 2.0 * (at_mean - sum_ll / static_cast<double>(count));
  return -2.0 * at_mean + 2.0 * pd;
}

regression::Dataset simulate(std::mt19937_64& rng, std::size_t n, const regression::ParamVector& psi) {
  std::uniform_real_distribution<double> ux(0.0, 4.0);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = ux(rng);
    y[i] = gld::draw(gld::GldParams(psi.beta[0] + psi.beta[1] * x[i],
                                    std::exp(psi.beta_prime[0] + psi.beta_prime[1] * x[i]), psi.alpha),
                     rng);
  }
  return regression::Dataset::simple(x, y);
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("summary of identical draws") {
    const Chain c = make_chain(Eigen::MatrixXd::Constant(50, 2, 3.25));
    const auto s = summarize(std::span<const Chain>(&c, 1));
    for (const auto& p : s.parameters) {
      CHECK(p.mean == 3.25);
      CHECK(p.median == 3.25);
      CHECK(p.sd == 0.0);
      CHECK(p.q025 == 3.25);
      CHECK(p.q975 == 3.25);
    }
    CHECK(s.n_draws == 50);
    CHECK_THROWS_AS(s.at("nope"), std::out_of_range);
  }

  TEST_CASE("interpolated quantiles") {
    std::vector<double> v(10000);
    std::iota(v.begin(), v.end(), 1.0);
    CHECK(interpolated_quantile(v, 0.025) == doctest::Approx(250.975).epsilon(1e-14));
    CHECK(interpolated_quantile(v, 0.975) == doctest::Approx(9750.025).epsilon(1e-14));
    CHECK(interpolated_quantile(v, 0.5) == 5000.5);
    CHECK(interpolated_quantile(v, 0.0) == 1.0);
    CHECK(interpolated_quantile(v, 1.0) == 10000.0);
    const std::vector<double> two{1.0, 3.0};
    CHECK(interpolated_quantile(two, 0.25) == 1.5);
  }

  TEST_CASE("summary is invariant to draw order and equivariant under affine maps") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
      const Chain a = normal_chain(rng, 200, 3, 0.5);
      Chain b = a;
      std::vector<Eigen::Index> perm(200);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (Eigen::Index i = 0; i < 200; ++i) b.draws.row(i) = a.draws.row(perm[static_cast<std::size_t>(i)]);
      const std::vector<Chain> split{make_chain(b.draws.topRows(77)), make_chain(b.draws.bottomRows(123))};
      const auto sa = summarize(std::span<const Chain>(&a, 1));
      const auto sb = summarize(split);
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(sa.parameters[j].mean == sb.parameters[j].mean);
        CHECK(sa.parameters[j].median == sb.parameters[j].median);
        CHECK(sa.parameters[j].q025 == sb.parameters[j].q025);
        CHECK(sa.parameters[j].sd == doctest::Approx(sb.parameters[j].sd).epsilon(1e-13));
      }
      const double scale = 2.5, shift = -7.0;
      Chain c = a;
      c.draws = (a.draws.array() * scale + shift).matrix();
      const auto sc = summarize(std::span<const Chain>(&c, 1));
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(sc.parameters[j].mean == doctest::Approx(scale * sa.parameters[j].mean + shift).epsilon(1e-12));
        CHECK(sc.parameters[j].median == doctest::Approx(scale * sa.parameters[j].median + shift).epsilon(1e-12));
        CHECK(sc.parameters[j].sd == doctest::Approx(scale * sa.parameters[j].sd).epsilon(1e-12));
        CHECK(sc.parameters[j].q975 == doctest::Approx(scale * sa.parameters[j].q975 + shift).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("R-hat of identical chains") {
    std::mt19937_64 rng(2);
    const Chain a = normal_chain(rng, 1000, 2, 0.0);
    const std::vector<Chain> copies(4, a);
    const auto r = gelman_rubin(copies);
    for (double v : r.rhat) CHECK(v == doctest::Approx(std::sqrt(999.0 / 1000.0)).epsilon(1e-12));
    CHECK(r.converged);
    CHECK(r.n_chains == 4);
  }

  TEST_CASE("R-hat of stationary and of separated chains") {
    std::mt19937_64 rng(3);
    std::vector<Chain> good;
    for (int k = 0; k < 4; ++k) good.push_back(normal_chain(rng, 2000, 3, 0.0));
    const auto r = gelman_rubin(good);
    for (double v : r.rhat) CHECK((v >= 0.99 && v <= 1.05));
    CHECK(r.converged);
    const auto rs = gelman_rubin(good, true);
    for (double v : rs.rhat) CHECK((v >= 0.99 && v <= 1.05));

    const std::vector<Chain> apart{normal_chain(rng, 2000, 1, 0.0), normal_chain(rng, 2000, 1, 10.0)};
    const auto bad = gelman_rubin(apart);
    CHECK(bad.rhat[0] > 3.0);
    CHECK_FALSE(bad.converged);

    // A chain that drifts within itself is only caught by splitting.
    Eigen::MatrixXd drift(2000, 1);
    for (Eigen::Index i = 0; i < 2000; ++i) drift(i, 0) = i < 1000 ? -5.0 + 0.01 * (i % 7) : 5.0 + 0.01 * (i % 5);
    const std::vector<Chain> drifting{make_chain(drift), make_chain(drift)};
    CHECK(gelman_rubin(drifting).rhat[0] < 1.0);
    CHECK(gelman_rubin(drifting, true).rhat[0] > 1.1);
  }

  TEST_CASE("R-hat is affine invariant and bounded below") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> centers(-1.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      std::vector<Chain> chains, mapped;
      for (int k = 0; k < 3; ++k) {
        chains.push_back(normal_chain(rng, 100, 2, centers(rng)));
        Chain m = chains.back();
        m.draws = (m.draws.array() * -3.0 + 11.0).matrix();
        mapped.push_back(m);
      }
      const auto a = gelman_rubin(chains);
      const auto b = gelman_rubin(mapped);
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(a.rhat[j] == doctest::Approx(b.rhat[j]).epsilon(1e-10));
        CHECK(a.rhat[j] >= std::sqrt(99.0 / 100.0) - 1e-12);
      }
    }
  }

  TEST_CASE("R-hat input validation") {
    std::mt19937_64 rng(5);
    const Chain a = normal_chain(rng, 100, 1, 0.0);
    CHECK_THROWS_AS(gelman_rubin(std::span<const Chain>(&a, 1)), std::invalid_argument);
    const std::vector<Chain> uneven{a, normal_chain(rng, 50, 1, 0.0)};
    CHECK_THROWS_AS(gelman_rubin(uneven), std::invalid_argument);
    const std::vector<Chain> constant(2, make_chain(Eigen::MatrixXd::Constant(20, 1, 1.0)));
    CHECK(gelman_rubin(constant).rhat[0] == 1.0);
  }

  TEST_CASE("DIC of a degenerate chain has zero effective parameters") {
    std::mt19937_64 rng(6);
    const regression::ParamVector psi{{1.0, 0.5}, {-0.5, 0.2}, 1.5};
    const auto ds = simulate(rng, 60, psi);
    Eigen::MatrixXd draws(30, 5);
    for (Eigen::Index i = 0; i < 30; ++i) draws.row(i) << 1.0, 0.5, -0.5, 0.2, 1.5;
    const Chain c = make_chain(draws);
    const auto r = dic(std::span<const Chain>(&c, 1), ds, baselines::model_log_likelihood(mcmc::Likelihood::glr));
    CHECK(std::abs(r.p_dic) < 1e-9);
    CHECK(r.dic == doctest::Approx(-2.0 * regression::log_likelihood(ds, psi)).epsilon(1e-12));
    CHECK(r.dataset_digest == ds.digest());
  }

  TEST_CASE("DIC matches an independent computation") {
    std::mt19937_64 rng(7);
    const regression::ParamVector psi{{2.0, 0.5}, {-1.0, 0.3}, 2.0};
    for (int t = 0; t < 5; ++t) {
      const auto ds = simulate(rng, 80, psi);
      mcmc::SamplerConfig config;
      config.n_iter = 1500;
      config.burn_in = 500;
      const auto chains = mcmc::run_chains(ds, config, 2, 100 + t);
      const auto r = dic(chains, ds, baselines::model_log_likelihood(mcmc::Likelihood::glr));
      CHECK(r.dic == doctest::Approx(dic_oracle(chains, ds)).epsilon(1e-9));
      CHECK(r.p_dic > 0.0);
      const auto m = dic(chains, ds, baselines::model_log_likelihood(mcmc::Likelihood::glr), PlugIn::median);
      CHECK(m.mean_log_lik == doctest::Approx(r.mean_log_lik).epsilon(1e-12));
    }
  }

  TEST_CASE("DIC at an impossible plug-in point") {
    std::mt19937_64 rng(8);
    const auto ds = simulate(rng, 30, regression::ParamVector{{0, 0}, {0, 0}, 1.0});
    const Chain c = make_chain(Eigen::MatrixXd::Constant(10, 5, 1.0));
    const ModelLogLik broken = [](const Dataset&, const ParamVector&) {
      return -std::numeric_limits<double>::infinity();
    };
    CHECK_THROWS_AS(dic(std::span<const Chain>(&c, 1), ds, broken), DicError);
  }

  TEST_CASE("DIC difference") {
    DicResult a, b;
    a.dic = 510.0;
    b.dic = 500.0;
    a.dataset_digest = b.dataset_digest = 42;
    CHECK(dic_difference(a, b) == 10.0);
    CHECK(dic_difference(b, a) == -10.0);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1e4, 1e4);
    for (int t = 0; t < 1000; ++t) {
      a.dic = u(rng);
      b.dic = u(rng);
      CHECK(dic_difference(a, b) == -dic_difference(b, a));
      CHECK(dic_difference(a, a) == 0.0);
    }
    b.dataset_digest = 43;
    CHECK_THROWS_AS(dic_difference(a, b), std::invalid_argument);
  }

  TEST_CASE("DIC excess over the true deviance shrinks per observation as n grows") {
    const regression::ParamVector psi{{2.0, 0.5}, {-1.0, 0.3}, 2.0};
    mcmc::SamplerConfig config;
    config.n_iter = 3000;
    config.burn_in = 1500;
    const auto glr = baselines::model_log_likelihood(mcmc::Likelihood::glr);
    std::vector<double> excess;
    for (std::size_t n : {50u, 200u, 800u}) {
      double total = 0.0;
      const int reps = 20;
      for (int r = 0; r < reps; ++r) {
        std::mt19937_64 rng(1000 * n + static_cast<std::uint64_t>(r));
        const auto ds = simulate(rng, n, psi);
        const auto chains = mcmc::run_chains(ds, config, 2, 7 + static_cast<std::uint64_t>(r));
        const auto d = dic(chains, ds, glr);
        total += (d.dic + 2.0 * regression::log_likelihood(ds, psi)) / static_cast<double>(n);
      }
      excess.push_back(total / reps);
    }
    MESSAGE("per-observation excess: " << excess[0] << " " << excess[1] << " " << excess[2]);
    CHECK(excess[0] > excess[1]);
    CHECK(excess[1] > excess[2]);
  }
}
