#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "khaos/multi_index.hpp"
#include "khaos/prior.hpp"
#include "khaos/rng.hpp"

namespace khaos {
namespace proposal {

/// Numerical floor/ceiling applied to each inclusion probability.
inline constexpr double kEtaEps = 1e-6;
/// Baseline added to the inclusion counts when forming weights.
inline constexpr double kEtaDelta = 1.0;

/// Per-variable inclusion probabilities for the weighted coin flips of a
/// birth proposal. eta_j is proportional to (inclusion_count_j + delta),
/// scaled so the expected interaction order is q0, then clipped to
/// [eps, 1-eps] with proportional redistribution of the clipped mass so the
/// total stays q0 (exactly, whenever feasible).
Eigen::VectorXd eta_weights(int q0, const std::vector<int>& inclusion_counts,
                            int p);

/// P(1 <= sum chi_j <= q_max) for independent Bernoulli(eta_j) flips, via an
/// O(p q_max) dynamic program over a capped Poisson-Binomial. Above
/// `exact_limit` variables a normal approximation with continuity correction
/// is used instead.
double valid_flip_prob(const Eigen::VectorXd& eta, int q_max,
                       int exact_limit = 500);

/// Log of the q0-marginalized probability that a birth proposal lands on the
/// term `alpha`, given the inclusion counts of the surrounding model state:
///
///   Q(alpha) = [ sum_{q0} P(q0) Bern(chi|eta(q0)) / P(valid|eta(q0)) ]
///              * P(d | q) / C(d-1, q-1),
///
/// with P(q0) prop. to q0^{-s_q} on {1..q_max}, P(d|q) prop. to d^{-s_d} on
/// {q..d_max}, and the division by P(valid) accounting for the
/// delayed-rejection redraw of invalid coin flips. The death correction uses
/// the same mass evaluated against the post-deletion counts, which is what
/// makes the forward/reverse corrections cancel exactly.
double log_birth_mass(const MultiIndex& alpha,
                      const std::vector<int>& inclusion_counts,
                      const PriorSpec& prior);

/// log A_Birth for a birth from a state with `num_terms` non-intercept terms
/// (the reverse death selects uniformly among num_terms + 1 candidates).
double log_birth_correction(const MultiIndex& alpha,
                            const std::vector<int>& inclusion_counts,
                            int num_terms, double p_birth, double p_death,
                            const PriorSpec& prior);

/// log A_Death for deleting `alpha` from a state with `num_terms` terms;
/// `counts_after_deletion` is the inclusion-count vector of the reverse-birth
/// context (i.e. with alpha's variables already removed).
double log_death_correction(const MultiIndex& alpha,
                            const std::vector<int>& counts_after_deletion,
                            int num_terms, double p_birth, double p_death,
                            const PriorSpec& prior);

/// Forward/reverse selection probabilities for a variable-swap mutation on
/// one term: the forward draw picks var_new among the term's inactive
/// variables with weight (count + delta); the reverse probability of picking
/// var_old is evaluated against the post-swap counts.
struct SwapProbs {
  double forward = 1.0;
  double reverse = 1.0;
};
SwapProbs variable_swap_probs(const MultiIndex& term, int var_old, int var_new,
                              const std::vector<int>& inclusion_counts);

/// Result of generating one birth candidate.
struct BirthDraw {
  std::optional<MultiIndex> alpha;  // empty when the move was abandoned
  int flip_attempts = 0;
};

/// Generate a candidate term by the weighted coin-flipping procedure:
/// sample q0, flip chi_j ~ Bern(eta_j) (redrawing up to `dr_cap` times while
/// the flip count is 0 or above q_max), sample the total degree, and
/// partition it uniformly across the active variables.
BirthDraw draw_birth_candidate(const std::vector<int>& inclusion_counts,
                               const PriorSpec& prior, int p, int dr_cap,
                               Rng& rng);

}  // namespace proposal
}  // namespace khaos
