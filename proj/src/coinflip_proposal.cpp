#include "khaos/coinflip_proposal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "khaos/candidate_space.hpp"
#include "khaos/stats.hpp"

namespace khaos {
namespace proposal {

Eigen::VectorXd eta_weights(int q0, const std::vector<int>& inclusion_counts,
                            int p) {
  if (p < 1 || static_cast<int>(inclusion_counts.size()) != p)
    throw std::invalid_argument("eta_weights: bad dimension");
  if (q0 < 1 || q0 > p) throw std::invalid_argument("eta_weights: bad q0");

  Eigen::VectorXd weight(p);
  for (int j = 0; j < p; ++j)
    weight[j] = static_cast<double>(inclusion_counts[static_cast<std::size_t>(j)]) +
                kEtaDelta;

  Eigen::VectorXd eta = Eigen::VectorXd::Zero(p);
  std::vector<bool> fixed(static_cast<std::size_t>(p), false);
  double mass = static_cast<double>(q0);

  // Water-filling: distribute q0 proportionally, clip anything outside
  // [eps, 1-eps] and re-spread the difference among the still-free entries.
  for (int pass = 0; pass <= p; ++pass) {
    double free_weight = 0.0;
    int free_count = 0;
    for (int j = 0; j < p; ++j) {
      if (!fixed[static_cast<std::size_t>(j)]) {
        free_weight += weight[j];
        ++free_count;
      }
    }
    if (free_count == 0) break;
    bool clipped = false;
    for (int j = 0; j < p; ++j) {
      if (fixed[static_cast<std::size_t>(j)]) continue;
      const double v = mass * weight[j] / free_weight;
      if (v > 1.0 - kEtaEps) {
        eta[j] = 1.0 - kEtaEps;
        fixed[static_cast<std::size_t>(j)] = true;
        mass -= eta[j];
        clipped = true;
      } else if (v < kEtaEps) {
        eta[j] = kEtaEps;
        fixed[static_cast<std::size_t>(j)] = true;
        mass -= eta[j];
        clipped = true;
      }
    }
    if (!clipped) {
      for (int j = 0; j < p; ++j) {
        if (!fixed[static_cast<std::size_t>(j)])
          eta[j] = mass * weight[j] / free_weight;
      }
      break;
    }
  }
  // Feasibility can run out when q0 equals p (every entry is capped); the
  // caps then stand and the sum falls short by p*eps.
  for (int j = 0; j < p; ++j)
    eta[j] = std::min(std::max(eta[j], kEtaEps), 1.0 - kEtaEps);
  return eta;
}

double valid_flip_prob(const Eigen::VectorXd& eta, int q_max,
                       int exact_limit) {
  const int p = static_cast<int>(eta.size());
  if (q_max < 1) throw std::invalid_argument("valid_flip_prob: q_max < 1");
  if (p > exact_limit) {
    // Normal approximation with continuity correction.
    const double mu = eta.sum();
    const double var = (eta.array() * (1.0 - eta.array())).sum();
    const double sd = std::sqrt(std::max(var, 1e-300));
    const double hi = normal_cdf((std::min(q_max, p) + 0.5 - mu) / sd);
    const double lo = normal_cdf((0.5 - mu) / sd);
    return std::max(hi - lo, 1e-300);
  }
  const int cap = std::min(q_max, p);
  // dp[s] = P(sum of flips so far == s), with s = cap+1 an absorbing
  // "overflow" state; O(p q_max) total.
  std::vector<double> dp(static_cast<std::size_t>(cap) + 2, 0.0);
  dp[0] = 1.0;
  for (int j = 0; j < p; ++j) {
    const double e = eta[j];
    dp[static_cast<std::size_t>(cap) + 1] +=
        dp[static_cast<std::size_t>(cap)] * e;
    for (int s = cap; s >= 1; --s) {
      dp[static_cast<std::size_t>(s)] =
          dp[static_cast<std::size_t>(s)] * (1.0 - e) +
          dp[static_cast<std::size_t>(s - 1)] * e;
    }
    dp[0] *= (1.0 - e);
  }
  double total = 0.0;
  for (int s = 1; s <= cap; ++s) total += dp[static_cast<std::size_t>(s)];
  return std::max(total, 1e-300);
}

namespace {

double log_degree_prob(int d, int q, const PriorSpec& prior) {
  // P(d | q) prop. to d^{-s_d} over {q, ..., d_max}.
  double c_d = 0.0;
  for (int dd = q; dd <= prior.d_max; ++dd)
    c_d += std::pow(static_cast<double>(dd), -prior.s_d);
  return -prior.s_d * std::log(static_cast<double>(d)) - std::log(c_d);
}

}  // namespace

double log_birth_mass(const MultiIndex& alpha,
                      const std::vector<int>& inclusion_counts,
                      const PriorSpec& prior) {
  const int p = alpha.dim();
  const int q = alpha.order();
  const int d = alpha.degree();
  const int qm = std::min(prior.q_max, p);
  if (q < 1 || q > qm || d > prior.d_max)
    throw std::invalid_argument("log_birth_mass: alpha outside the space");

  double c_q = 0.0;
  for (int q0 = 1; q0 <= qm; ++q0)
    c_q += std::pow(static_cast<double>(q0), -prior.s_q);

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(qm));
  for (int q0 = 1; q0 <= qm; ++q0) {
    const Eigen::VectorXd eta = eta_weights(q0, inclusion_counts, p);
    double log_flips = 0.0;
    for (int j = 0; j < p; ++j) {
      log_flips += (alpha[j] > 0) ? std::log(eta[j]) : std::log1p(-eta[j]);
    }
    const double log_pq0 =
        -prior.s_q * std::log(static_cast<double>(q0)) - std::log(c_q);
    const double log_valid = std::log(valid_flip_prob(eta, qm));
    terms.push_back(log_pq0 + log_flips - log_valid);
  }
  const double log_chi = log_sum_exp(terms);
  return log_chi + log_degree_prob(d, q, prior) - log_count_compositions(d, q);
}

double log_birth_correction(const MultiIndex& alpha,
                            const std::vector<int>& inclusion_counts,
                            int num_terms, double p_birth, double p_death,
                            const PriorSpec& prior) {
  return std::log(p_death) - std::log(p_birth) -
         std::log(static_cast<double>(num_terms) + 1.0) -
         log_birth_mass(alpha, inclusion_counts, prior);
}

double log_death_correction(const MultiIndex& alpha,
                            const std::vector<int>& counts_after_deletion,
                            int num_terms, double p_birth, double p_death,
                            const PriorSpec& prior) {
  if (num_terms < 1)
    throw std::invalid_argument("log_death_correction: no deletable terms");
  return std::log(p_birth) - std::log(p_death) +
         std::log(static_cast<double>(num_terms)) +
         log_birth_mass(alpha, counts_after_deletion, prior);
}

SwapProbs variable_swap_probs(const MultiIndex& term, int var_old, int var_new,
                              const std::vector<int>& inclusion_counts) {
  const int p = term.dim();
  if (var_old < 0 || var_old >= p || var_new < 0 || var_new >= p ||
      term[var_old] == 0 || term[var_new] != 0)
    throw std::invalid_argument("variable_swap_probs: bad swap");

  SwapProbs out;
  double fwd_total = 0.0;
  for (int j = 0; j < p; ++j) {
    if (term[j] == 0)
      fwd_total += inclusion_counts[static_cast<std::size_t>(j)] + kEtaDelta;
  }
  out.forward =
      (inclusion_counts[static_cast<std::size_t>(var_new)] + kEtaDelta) /
      fwd_total;

  // Post-swap context: var_old's activity moved onto var_new.
  auto count_after = [&](int j) {
    double c = inclusion_counts[static_cast<std::size_t>(j)];
    if (j == var_old) c -= 1.0;
    if (j == var_new) c += 1.0;
    return c + kEtaDelta;
  };
  double rev_total = 0.0;
  for (int j = 0; j < p; ++j) {
    const bool inactive_after = (j == var_old) || (term[j] == 0 && j != var_new);
    if (inactive_after) rev_total += count_after(j);
  }
  out.reverse = count_after(var_old) / rev_total;
  return out;
}

BirthDraw draw_birth_candidate(const std::vector<int>& inclusion_counts,
                               const PriorSpec& prior, int p, int dr_cap,
                               Rng& rng) {
  BirthDraw out;
  const int q_max = std::min(prior.q_max, p);

  std::vector<double> wq(static_cast<std::size_t>(q_max));
  for (int q0 = 1; q0 <= q_max; ++q0)
    wq[static_cast<std::size_t>(q0 - 1)] =
        std::pow(static_cast<double>(q0), -prior.s_q);
  const int q0 = 1 + rng.categorical(wq);

  const Eigen::VectorXd eta = eta_weights(q0, inclusion_counts, p);
  std::vector<int> active;
  bool ok = false;
  for (int attempt = 0; attempt < dr_cap; ++attempt) {
    ++out.flip_attempts;
    active.clear();
    for (int j = 0; j < p; ++j) {
      if (rng.uniform() < eta[j]) active.push_back(j);
    }
    const int q = static_cast<int>(active.size());
    if (q >= 1 && q <= q_max) {
      ok = true;
      break;
    }
  }
  if (!ok) return out;  // abandoned after the delayed-rejection cap

  const int q = static_cast<int>(active.size());
  std::vector<double> wd(static_cast<std::size_t>(prior.d_max - q + 1));
  for (int d = q; d <= prior.d_max; ++d)
    wd[static_cast<std::size_t>(d - q)] =
        std::pow(static_cast<double>(d), -prior.s_d);
  const int d = q + rng.categorical(wd);

  const std::vector<int> parts = sample_composition(d, q, rng);
  std::vector<int> degrees(static_cast<std::size_t>(p), 0);
  for (int k = 0; k < q; ++k)
    degrees[static_cast<std::size_t>(active[static_cast<std::size_t>(k)])] =
        parts[static_cast<std::size_t>(k)];
  out.alpha = MultiIndex(std::move(degrees));
  return out;
}

}  // namespace proposal
}  // namespace khaos
