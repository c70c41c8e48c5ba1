#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "khaos/bayes_linear.hpp"
#include "khaos/coinflip_proposal.hpp"
#include "khaos/legendre.hpp"
#include "khaos/multi_index.hpp"
#include "khaos/prior.hpp"
#include "khaos/rng.hpp"

namespace khaos {

struct SamplerConfig {
  int n_iter = 10000;
  int n_burn = 5000;
  int n_thin = 10;
  double p_birth = 1.0 / 3.0;
  double p_death = 1.0 / 3.0;  // p_mutate = 1 - p_birth - p_death
  int m_max = 200;
  int delayed_rejection_cap = 10;
  int adapt_interval = 100;
  std::uint64_t seed = 0;
  /// Debug: recount inclusion bookkeeping every 100 accepted moves.
  bool check_invariants = false;

  void validate() const;
};

/// One stored posterior sample.
struct Draw {
  std::vector<MultiIndex> terms;  // non-intercept terms, column order
  Eigen::VectorXd beta;           // coefficients, intercept first
  double sigma2 = 1.0;
  double g0sq = 1.0;
  double lambda = 1.0;
};

struct MoveCounters {
  long proposed = 0;
  long accepted = 0;
  long abandoned = 0;
  double rate() const {
    return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
  }
};

struct MoveStats {
  MoveCounters birth, death, mutate_degree, mutate_variable, g0;
};

/// Post-burn-in samples plus provenance. Immutable once returned.
struct PosteriorDraws {
  int p = 0;
  int n_train = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  PriorSpec prior;
  SamplerConfig config;
  std::vector<Draw> draws;
  MoveStats stats;
};

/// Live state of one chain.
struct ChainState {
  std::vector<MultiIndex> terms;
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
  double g0sq = 1.0;
  double lambda = 1.0;
  std::vector<int> inclusion_counts;
  /// (degree-mutation, variable-mutation) selection probabilities.
  std::array<double, 2> mutate_weights{0.5, 0.5};
};

/// Mutation-type weights from smoothed empirical acceptance rates, clipped
/// to [0.10, 0.90]. Zero information gives (0.5, 0.5).
std::array<double, 2> adapt_mutation_weights(const MoveCounters& degree,
                                             const MoveCounters& variable);

/// The transdimensional sampler: birth/death/mutation moves with the
/// weighted coin-flip proposal and delayed rejection, conjugate Gibbs sweeps
/// for (beta, sigma^2, lambda), and a Laplace-proposal MH step for g0^2
/// under the g-prior families.
class Sampler {
 public:
  Sampler(Eigen::MatrixXd X, Eigen::VectorXd y, PriorSpec prior,
          SamplerConfig config);

  /// One full iteration: move, Gibbs sweep, g0^2 update, adaptation.
  void step();

  /// Run the configured chain and collect thinned post-burn-in draws.
  PosteriorDraws run();

  /// Replace the response vector (latent-variable models resample it
  /// between sweeps); refreshes the cached conditional.
  void set_response(const Eigen::VectorXd& y);

  const ChainState& state() const { return state_; }
  const MoveStats& stats() const { return stats_; }
  const PriorSpec& prior() const { return prior_; }
  int iteration() const { return iter_; }
  Rng& rng() { return rng_; }

  /// Current fitted values Psi * beta on the training inputs.
  Eigen::VectorXd fitted() const;

  Draw snapshot() const;

 private:
  enum class Move { kBirth, kDeath, kMutateDegree, kMutateVariable };

  void birth_move();
  void death_move();
  void mutate_degree_move();
  void mutate_variable_move();
  void gibbs_sweep();
  void update_g0();
  void refresh_conditional();
  void maybe_adapt();
  void check_counts() const;

  int m1() const { return static_cast<int>(state_.terms.size()) + 1; }
  GaussianLinearStats active_stats() const;
  Eigen::VectorXd g_full() const;

  // Evaluate a candidate model assembled in the scratch buffers.
  bool evaluate_candidate(const GaussianLinearStats& stats,
                          const std::vector<MultiIndex>& indices,
                          ConditionalPosterior* out) const;

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  PriorSpec prior_;
  SamplerConfig config_;
  Rng rng_;
  LegendreTable table_;

  double log_card_ = 0.0;  // log |A_{p,dmax,qmax}|
  int n_ = 0;
  int p_ = 0;

  // Active model buffers (top-left blocks are live).
  Eigen::MatrixXd cols_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd psi_t_y_;
  double yty_ = 0.0;

  ChainState state_;
  ConditionalPosterior cp_;
  MoveStats stats_;
  int iter_ = 0;
  long accepted_moves_ = 0;
  Eigen::VectorXd scratch_col_;
};

/// Fit KHAOS end to end. Deterministic for a fixed seed.
PosteriorDraws run_chain(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const PriorSpec& prior, const SamplerConfig& config);

/// Function draws f_d(x) for each stored draw (rows) and each new point
/// (columns).
Eigen::MatrixXd posterior_function_draws(const PosteriorDraws& draws,
                                         const Eigen::MatrixXd& x_new);

/// Predictive samples: function draws plus (optionally) N(0, sigma2_d) noise.
Eigen::MatrixXd predictive_samples(const PosteriorDraws& draws,
                                   const Eigen::MatrixXd& x_new,
                                   bool include_noise, Rng& rng);

struct PredictionSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  Eigen::MatrixXd quantiles;  // n_new x probs.size()
  std::vector<double> probs;
};

/// Deterministic predictive summaries: the per-point mean/sd/quantiles of
/// the scale mixture sum_d N(f_d(x), sigma2_d) (or of the plain function
/// draws when include_noise is false).
PredictionSummary predict(const PosteriorDraws& draws,
                          const Eigen::MatrixXd& x_new,
                          const std::vector<double>& probs,
                          bool include_noise);

std::uint64_t config_hash(const PriorSpec& prior, const SamplerConfig& config);

}  // namespace khaos
