#pragma once

#include <Eigen/Core>
#include <map>
#include <vector>

#include "khaos/multi_index.hpp"
#include "khaos/sampler.hpp"

namespace khaos {

/// Variance decomposition of a single PCE with orthonormal basis terms:
/// V_u sums the squared coefficients of all terms whose active-variable set
/// is exactly u. Valid for independent Uniform[0,1] inputs.
struct SobolDecomposition {
  std::map<std::vector<int>, double> partial_variance;  // u -> V_u
  double total_variance = 0.0;
};

SobolDecomposition sobol_from_coefficients(
    const std::vector<MultiIndex>& terms, const Eigen::VectorXd& beta);

/// Summary statistic over posterior samples of one index.
struct IndexSamples {
  std::vector<double> samples;
  double mean = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

/// Posterior Sobol analysis: per-draw partial indices S_u (normalized by
/// that draw's model variance), total indices T_i, and the unexplained noise
/// share sigma^2 / (Var(f) + sigma^2). Subsets with zero variance in every
/// draw are omitted from the report.
struct SobolSummary {
  int p = 0;
  std::map<std::vector<int>, IndexSamples> partial;  // u -> S_u samples
  std::vector<IndexSamples> total;                   // T_1..T_p
  IndexSamples noise_share;
};

SobolSummary sobol_posterior(const PosteriorDraws& draws);

/// Same aggregation for an externally supplied list of
/// (terms, coefficients, noise variance) triples; used by the single-fit
/// (sparse) path where there is exactly one sample.
struct CoefficientSample {
  std::vector<MultiIndex> terms;
  Eigen::VectorXd beta;
  double sigma2 = 0.0;
};
SobolSummary sobol_from_samples(const std::vector<CoefficientSample>& samples,
                                int p);

}  // namespace khaos
