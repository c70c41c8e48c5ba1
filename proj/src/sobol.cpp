#include "khaos/sobol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "khaos/stats.hpp"

namespace khaos {

SobolDecomposition sobol_from_coefficients(
    const std::vector<MultiIndex>& terms, const Eigen::VectorXd& beta) {
  const bool has_intercept =
      beta.size() == static_cast<Eigen::Index>(terms.size()) + 1;
  if (!has_intercept &&
      beta.size() != static_cast<Eigen::Index>(terms.size()))
    throw std::invalid_argument("sobol_from_coefficients: length mismatch");

  SobolDecomposition out;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const double b =
        beta[static_cast<Eigen::Index>(t) + (has_intercept ? 1 : 0)];
    if (terms[t].is_intercept() || b == 0.0) continue;
    const double v = b * b;
    out.partial_variance[terms[t].active()] += v;
    out.total_variance += v;
  }
  return out;
}

namespace {

void finalize(IndexSamples& s) {
  if (s.samples.empty()) return;
  s.mean = mean_var(s.samples).mean;
  std::vector<double> sorted = s.samples;
  std::sort(sorted.begin(), sorted.end());
  s.q05 = sorted_quantile(sorted, 0.05);
  s.q50 = sorted_quantile(sorted, 0.50);
  s.q95 = sorted_quantile(sorted, 0.95);
}

}  // namespace

SobolSummary sobol_from_samples(const std::vector<CoefficientSample>& samples,
                                int p) {
  if (samples.empty())
    throw std::invalid_argument("sobol_from_samples: no samples");
  SobolSummary out;
  out.p = p;
  out.total.resize(static_cast<std::size_t>(p));
  const std::size_t nd = samples.size();
  for (auto& t : out.total) t.samples.assign(nd, 0.0);
  out.noise_share.samples.assign(nd, 0.0);

  for (std::size_t d = 0; d < nd; ++d) {
    const SobolDecomposition dec =
        sobol_from_coefficients(samples[d].terms, samples[d].beta);
    const double var_f = dec.total_variance;
    out.noise_share.samples[d] =
        (var_f + samples[d].sigma2 > 0.0)
            ? samples[d].sigma2 / (var_f + samples[d].sigma2)
            : 0.0;
    for (const auto& [u, v] : dec.partial_variance) {
      const double s_u = var_f > 0.0 ? v / var_f : 0.0;
      auto& entry = out.partial[u];
      if (entry.samples.size() != nd) entry.samples.assign(nd, 0.0);
      entry.samples[d] = s_u;
      for (int var : u)
        out.total[static_cast<std::size_t>(var)].samples[d] += s_u;
    }
  }

  for (auto& [u, s] : out.partial) finalize(s);
  for (auto& t : out.total) finalize(t);
  finalize(out.noise_share);
  return out;
}

SobolSummary sobol_posterior(const PosteriorDraws& draws) {
  if (draws.draws.empty())
    throw std::invalid_argument("sobol_posterior: no draws");
  std::vector<CoefficientSample> samples;
  samples.reserve(draws.draws.size());
  for (const auto& d : draws.draws) {
    CoefficientSample s;
    s.terms = d.terms;
    s.beta = d.beta;
    s.sigma2 = d.sigma2;
    samples.push_back(std::move(s));
  }
  return sobol_from_samples(samples, draws.p);
}

}  // namespace khaos
