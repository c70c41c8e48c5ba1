#pragma once

#include <Eigen/Core>
#include <vector>

#include "khaos/prior.hpp"
#include "khaos/sampler.hpp"

namespace khaos {

/// Latent-Gaussian ordinal regression: the observed label y_i = k whenever
/// the latent response z_i falls in (c_{k-1}, c_k], with z_i = f(x_i) + e_i,
/// e_i ~ N(0,1). The adaptive PCE sampler runs on the latent response with
/// the noise variance pinned at 1; cutpoints use the standard
/// data-augmentation update (uniform between the adjacent order statistics
/// of z), with c_1 = 0 fixed for identifiability.
struct OrdinalFit {
  int num_categories = 2;
  PosteriorDraws draws;  // latent-scale draws, sigma2 == 1
  /// One vector per stored draw: the finite cutpoints c_1..c_{K-1}
  /// (c_1 == 0).
  std::vector<Eigen::VectorXd> cutpoint_draws;
};

/// Labels must cover {1, ..., K} with every category observed at least once
/// and K >= 2.
OrdinalFit fit_ordinal(const Eigen::MatrixXd& X, const std::vector<int>& y,
                       const PriorSpec& prior, const SamplerConfig& config);

/// Posterior-averaged category probabilities; rows sum to one.
Eigen::MatrixXd predict_ordinal(const OrdinalFit& fit,
                                const Eigen::MatrixXd& x_new);

}  // namespace khaos
