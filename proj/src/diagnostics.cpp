#include "bglr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bglr::diagnostics {

const ParameterSummary& PosteriorSummary::at(const std::string& name) const {
  for (const auto& s : parameters) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("no parameter named '" + name + "'");
}

double interpolated_quantile(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("interpolated_quantile: empty data");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("interpolated_quantile: prob outside [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

namespace {

void check_layout(std::span<const Chain> chains) {
  if (chains.empty()) throw std::invalid_argument("no chains");
  for (const auto& c : chains) {
    if (c.dimension() != chains.front().dimension()) {
      throw std::invalid_argument("chains have different parameter counts");
    }
  }
}

std::string name_of(const Chain& c, std::size_t j) {
  return j < c.names.size() ? c.names[j] : "p" + std::to_string(j);
}

}  // namespace

PosteriorSummary summarize(std::span<const Chain> chains) {
  check_layout(chains);
  std::size_t total = 0;
  for (const auto& c : chains) total += c.size();
  if (total < 2) throw std::invalid_argument("summarize: need at least two retained draws");

  PosteriorSummary out;
  out.n_draws = total;
  const std::size_t d = chains.front().dimension();
  std::vector<double> pooled;
  pooled.reserve(total);
  for (std::size_t j = 0; j < d; ++j) {
    pooled.clear();
    for (const auto& c : chains) {
      const auto col = c.draws.col(static_cast<Eigen::Index>(j));
      pooled.insert(pooled.end(), col.data(), col.data() + col.size());
    }
    std::sort(pooled.begin(), pooled.end());
    // Summing in sorted order keeps the summary independent of chain order.
    double mean = 0.0;
    for (double v : pooled) mean += v;
    mean /= static_cast<double>(total);
    double ss = 0.0;
    for (double v : pooled) ss += (v - mean) * (v - mean);
    ParameterSummary s;
    s.name = name_of(chains.front(), j);
    s.mean = mean;
    s.sd = std::sqrt(ss / static_cast<double>(total - 1));
    s.median = interpolated_quantile(pooled, 0.5);
    s.q025 = interpolated_quantile(pooled, 0.025);
    s.q975 = interpolated_quantile(pooled, 0.975);
    out.parameters.push_back(std::move(s));
  }
  return out;
}

double RhatReport::max() const {
  double m = 0.0;
  for (double r : rhat) m = std::max(m, std::isnan(r) ? std::numeric_limits<double>::infinity() : r);
  return m;
}

RhatReport gelman_rubin(std::span<const Chain> chains, bool split, double threshold) {
  check_layout(chains);
  if (chains.size() < 2) throw std::invalid_argument("gelman_rubin: need at least two chains");
  const std::size_t length = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != length) throw std::invalid_argument("gelman_rubin: chains have different lengths");
  }
  if (length < 10) throw std::invalid_argument("gelman_rubin: chains need at least 10 draws");

  // Segments: whole chains, or first/second halves.
  struct Segment {
    const Chain* chain;
    std::size_t begin;
  };
  std::vector<Segment> segments;
  const std::size_t n = split ? length / 2 : length;
  for (const auto& c : chains) {
    segments.push_back({&c, split ? length - 2 * n : 0});
    if (split) segments.push_back({&c, length - n});
  }
  const double m = static_cast<double>(segments.size());
  const double nd = static_cast<double>(n);

  RhatReport report;
  report.n_chains = chains.size();
  report.threshold = threshold;
  const std::size_t d = chains.front().dimension();
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> means;
    double w = 0.0;
    for (const auto& seg : segments) {
      const auto col = seg.chain->draws.col(static_cast<Eigen::Index>(j))
                           .segment(static_cast<Eigen::Index>(seg.begin), static_cast<Eigen::Index>(n));
      const double mean = col.mean();
      means.push_back(mean);
      w += (col.array() - mean).square().sum() / (nd - 1.0);
    }
    w /= m;
    double grand = 0.0;
    for (double v : means) grand += v;
    grand /= m;
    double b = 0.0;
    for (double v : means) b += (v - grand) * (v - grand);
    b *= nd / (m - 1.0);

    double r;
    if (w > 0.0) {
      r = std::sqrt(((nd - 1.0) / nd * w + b / nd) / w);
    } else {
      r = b > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    report.names.push_back(name_of(chains.front(), j));
    report.rhat.push_back(r);
  }
  report.converged = std::all_of(report.rhat.begin(), report.rhat.end(),
                                 [&](double r) { return r < threshold; });
  return report;
}

ParamVector draw_at(const Chain& chain, std::size_t row) {
  const bool has_alpha = chain.likelihood == mcmc::Likelihood::glr;
  const std::size_t d = chain.dimension();
  const std::size_t p = (d - (has_alpha ? 1 : 0)) / 2;
  std::vector<double> flat(d);
  for (std::size_t j = 0; j < d; ++j) {
    flat[j] = chain.draws(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
  }
  return ParamVector::unflatten(flat, p, has_alpha);
}

DicResult dic(std::span<const Chain> chains, const Dataset& ds, const ModelLogLik& model_loglik,
              PlugIn plug_in, std::string model) {
  check_layout(chains);
  std::size_t total = 0;
  double sum = 0.0;
  for (const auto& c : chains) {
    for (std::size_t t = 0; t < c.size(); ++t) {
      sum += model_loglik(ds, draw_at(c, t));
      ++total;
    }
  }
  if (total == 0) throw std::invalid_argument("dic: chains hold no draws");

  const PosteriorSummary summary = summarize(chains);
  const bool has_alpha = chains.front().likelihood == mcmc::Likelihood::glr;
  const std::size_t d = chains.front().dimension();
  std::vector<double> flat(d);
  for (std::size_t j = 0; j < d; ++j) {
    flat[j] = plug_in == PlugIn::mean ? summary.parameters[j].mean : summary.parameters[j].median;
  }

  DicResult r;
  r.plug_in_psi = ParamVector::unflatten(flat, (d - (has_alpha ? 1 : 0)) / 2, has_alpha);
  r.log_lik_at_plug_in = model_loglik(ds, r.plug_in_psi);
  if (!std::isfinite(r.log_lik_at_plug_in)) {
    throw DicError("dic: log-likelihood at the plug-in point is not finite");
  }
  r.mean_log_lik = sum / static_cast<double>(total);
  r.p_dic = 2.0 * (r.log_lik_at_plug_in - r.mean_log_lik);
  r.dic = -2.0 * r.log_lik_at_plug_in + 2.0 * r.p_dic;
  r.dataset_digest = ds.digest();
  r.model = std::move(model);
  return r;
}

double dic_difference(const DicResult& a, const DicResult& b) {
  if (a.dataset_digest != b.dataset_digest) {
    throw std::invalid_argument("dic_difference: results refer to different datasets");
  }
  return a.dic - b.dic;
}

}  // namespace bglr::diagnostics
