#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "khaos/multi_index.hpp"
#include "khaos/prior.hpp"
#include "khaos/rng.hpp"

namespace khaos {

enum class SparseCriterion { kBayesFactor, kKic };

struct SparseOptions {
  int initial_d_max = 2;
  int initial_q_max = 2;  // clamped to min(p, d_max)
  SparseCriterion criterion = SparseCriterion::kBayesFactor;
  bool enrichment = true;  // full rebuild with early stopping
  int max_enrichments = 10;
  /// Hard cap on the enumerated candidate set. Exceeding it on the first
  /// stage is an error; exceeding it during enrichment stops enriching.
  std::uint64_t candidate_cap = 30000;
  /// Hyperparameters for the Bayes-factor criterion and the predictive
  /// posterior (modified g-prior at unit-information g0^2 = n).
  PriorSpec prior;
};

/// Result of the greedy sparse fit.
struct SparseFit {
  int p = 0;
  int n = 0;
  std::vector<MultiIndex> selected;  // in selection order
  Eigen::VectorXd beta_hat;          // intercept first, then selected terms
  std::vector<double> score_path;    // criterion value per evaluated size
  std::vector<std::pair<int, int>> enrichment_history;  // (d_max, q_max)
  double score = 0.0;  // criterion at the returned model

  // Conjugate posterior at the selected model, for predictive spread.
  Eigen::MatrixXd chol_precision;  // L with L L' = Sigma_n^-1
  double a_n = 1.0;                // sigma^2 | y ~ Inv-Gamma(a_n, b_n)
  double b_n = 1.0;
  double sigma2_hat = 0.0;         // posterior mean b_n / (a_n - 1)
  double g0sq_used = 1.0;
};

/// Squared-correlation ranking of candidate columns against y; ties broken
/// by the graded multi-index order, constant columns ranked last with r²=0.
/// Returns a permutation of candidate positions.
std::vector<int> rank_by_correlation(const std::vector<MultiIndex>& candidates,
                                     const Eigen::MatrixXd& X,
                                     const Eigen::VectorXd& y);

/// Greedy partial-correlation reordering by sequential residualization
/// (orthogonal matching pursuit on the centered columns). Candidates that
/// become numerically collinear are placed last.
std::vector<int> rank_by_partial_correlation(
    const std::vector<MultiIndex>& candidates, const Eigen::MatrixXd& X,
    const Eigen::VectorXd& y);

/// Scan nested models along the given candidate ordering and return the size
/// m* at which the criterion stops improving (first failure, counting from
/// m = 0 upward). `scores` (optional) receives the evaluated criterion path.
int select_model_size(const std::vector<MultiIndex>& ordered_candidates,
                      const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      SparseCriterion criterion, const PriorSpec& prior,
                      std::vector<double>* scores = nullptr);

/// The full greedy sparse PCE: enumerate, rank, select, enrich, repeat.
SparseFit fit_sparse(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const SparseOptions& options);

/// Point predictions and Gaussian predictive sd at the selected model.
struct SparsePrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
};
SparsePrediction sparse_predict(const SparseFit& fit,
                                const Eigen::MatrixXd& x_new);

/// Monte Carlo predictive samples from the conjugate posterior of the
/// selected model (rows are samples).
Eigen::MatrixXd sparse_predictive_samples(const SparseFit& fit,
                                          const Eigen::MatrixXd& x_new,
                                          int n_samples, bool include_noise,
                                          Rng& rng);

}  // namespace khaos
