#include "khaos/ordinal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "khaos/stats.hpp"

namespace khaos {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Interval (lower, upper] of the latent response for label k (1-based),
// given the finite cutpoints c[0..K-2] = c_1..c_{K-1}.
std::pair<double, double> category_bounds(int k, const Eigen::VectorXd& cuts) {
  const int num_cats = static_cast<int>(cuts.size()) + 1;
  const double lo = (k <= 1) ? -kInf : cuts[k - 2];
  const double hi = (k >= num_cats) ? kInf : cuts[k - 1];
  return {lo, hi};
}

}  // namespace

OrdinalFit fit_ordinal(const Eigen::MatrixXd& X, const std::vector<int>& y,
                       const PriorSpec& prior, const SamplerConfig& config) {
  const int n = static_cast<int>(X.rows());
  if (static_cast<int>(y.size()) != n)
    throw std::invalid_argument("fit_ordinal: label length mismatch");
  int num_cats = 0;
  for (int label : y) {
    if (label < 1) throw std::invalid_argument("fit_ordinal: labels start at 1");
    num_cats = std::max(num_cats, label);
  }
  if (num_cats < 2)
    throw std::invalid_argument("fit_ordinal: need at least two categories");
  std::vector<int> counts(static_cast<std::size_t>(num_cats), 0);
  for (int label : y) counts[static_cast<std::size_t>(label - 1)]++;
  for (int k = 0; k < num_cats; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0)
      throw std::invalid_argument("fit_ordinal: category " +
                                  std::to_string(k + 1) + " unobserved");
  }

  PriorSpec latent_prior = prior;
  latent_prior.fixed_sigma2 = 1.0;

  // Initial cutpoints from the empirical cumulative frequencies, shifted so
  // c_1 = 0.
  Eigen::VectorXd cuts(num_cats - 1);
  {
    double cum = 0.0;
    const double shift = [&] {
      double c0 = static_cast<double>(counts[0]) / n;
      c0 = std::min(std::max(c0, 1.0 / (n + 1.0)), 1.0 - 1.0 / (n + 1.0));
      return normal_quantile(c0);
    }();
    for (int k = 0; k < num_cats - 1; ++k) {
      cum += static_cast<double>(counts[static_cast<std::size_t>(k)]) / n;
      const double clipped =
          std::min(std::max(cum, 1.0 / (n + 1.0)), 1.0 - 1.0 / (n + 1.0));
      cuts[k] = normal_quantile(clipped) - shift;
    }
    cuts[0] = 0.0;
    for (int k = 1; k < num_cats - 1; ++k)
      cuts[k] = std::max(cuts[k], cuts[k - 1] + 1e-3);
  }

  // Initial latent values: truncated standard normals within each label's
  // interval, centered at the category midpoint.
  Rng init_rng(Rng::derive_seed(config.seed, std::array<std::uint64_t, 1>{
                                                 0x0fd1a1ull}));
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) {
    const auto [lo, hi] = category_bounds(y[static_cast<std::size_t>(i)], cuts);
    const double a = std::max(lo, -8.0);
    const double b = std::min(hi, 8.0);
    z[i] = init_rng.trunc_normal(0.0, 1.0, a, b);
  }

  Sampler sampler(X, z, latent_prior, config);
  Rng& rng = sampler.rng();

  OrdinalFit fit;
  fit.num_categories = num_cats;
  fit.draws.p = static_cast<int>(X.cols());
  fit.draws.n_train = n;
  fit.draws.seed = config.seed;
  fit.draws.prior = sampler.prior();
  fit.draws.config = config;
  fit.draws.config_hash = config_hash(sampler.prior(), config);

  for (int iter = 0; iter < config.n_iter; ++iter) {
    // Data augmentation: z_i | f, c, y_i from the truncated unit normal.
    const Eigen::VectorXd f = sampler.fitted();
    for (int i = 0; i < n; ++i) {
      const auto [lo, hi] =
          category_bounds(y[static_cast<std::size_t>(i)], cuts);
      const double a = std::max(lo, f[i] - 37.0);
      const double b = std::min(hi, f[i] + 37.0);
      z[i] = (a < b) ? rng.trunc_normal(f[i], 1.0, a, b)
                     : std::min(std::max(f[i], lo), hi);
    }
    sampler.set_response(z);
    sampler.step();

    // Cutpoint sweep (c_1 stays 0): uniform between the adjacent order
    // statistics of z and the neighbouring cutpoints.
    for (int k = 2; k <= num_cats - 1; ++k) {
      double lo = cuts[k - 2];  // c_{k-1}
      double hi = (k < num_cats - 1) ? cuts[k] : kInf;
      for (int i = 0; i < n; ++i) {
        const int label = y[static_cast<std::size_t>(i)];
        if (label == k) lo = std::max(lo, z[i]);
        if (label == k + 1) hi = std::min(hi, z[i]);
      }
      if (std::isinf(hi)) hi = std::max(lo, z.maxCoeff()) + 1.0;
      if (hi > lo) cuts[k - 1] = rng.uniform(lo, hi);
    }

    const int done = sampler.iteration();
    if (done > config.n_burn && (done - config.n_burn) % config.n_thin == 0) {
      fit.draws.draws.push_back(sampler.snapshot());
      fit.cutpoint_draws.push_back(cuts);
    }
  }
  fit.draws.stats = sampler.stats();
  return fit;
}

Eigen::MatrixXd predict_ordinal(const OrdinalFit& fit,
                                const Eigen::MatrixXd& x_new) {
  if (fit.draws.draws.empty())
    throw std::invalid_argument("predict_ordinal: no draws");
  const Eigen::MatrixXd f = posterior_function_draws(fit.draws, x_new);
  const int nd = static_cast<int>(f.rows());
  const int nn = static_cast<int>(f.cols());
  const int num_cats = fit.num_categories;

  Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(nn, num_cats);
  for (int d = 0; d < nd; ++d) {
    const Eigen::VectorXd& cuts =
        fit.cutpoint_draws[static_cast<std::size_t>(d)];
    for (int i = 0; i < nn; ++i) {
      double prev = 0.0;
      for (int k = 1; k <= num_cats; ++k) {
        const double upper =
            (k >= num_cats) ? 1.0 : normal_cdf(cuts[k - 1] - f(d, i));
        probs(i, k - 1) += upper - prev;
        prev = upper;
      }
    }
  }
  probs /= static_cast<double>(nd);
  return probs;
}

}  // namespace khaos
