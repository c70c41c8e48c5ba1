#pragma once

#include <Eigen/Core>

#include "khaos/basis_set.hpp"
#include "khaos/prior.hpp"
#include "khaos/rng.hpp"

namespace khaos {

/// Sufficient statistics of one Gaussian linear model: Gram matrix,
/// Psi'y, y'y and the sample size. Everything the conjugate algebra needs.
struct GaussianLinearStats {
  Eigen::MatrixXd gram;
  Eigen::VectorXd psi_t_y;
  double yty = 0.0;
  int n = 0;
};

GaussianLinearStats make_stats(const BasisSet& basis, const Eigen::VectorXd& y);

/// Conditional posterior of (beta, sigma^2) given the basis, plus the
/// closed-form log marginal likelihood of the model
///   y = Psi beta + eps,  beta | sigma^2 ~ N(0, sigma^2 S0),
///   sigma^2 ~ Inv-Gamma(a_sigma, b_sigma)
/// (or sigma^2 fixed, for latent-response models):
///
///   log p(y|M) = -(n/2) log 2pi - 1/2 log|S0| + 1/2 log|Sigma_n|
///                + a log b - (a + n/2) log(b + R/2)
///                + lgamma(a + n/2) - lgamma(a),
/// with Sigma_n = (Psi'Psi + S0^-1)^-1, mu_n = Sigma_n Psi'y and
/// R = y'y - mu_n' Psi'y.
struct ConditionalPosterior {
  Eigen::MatrixXd chol_lower;  // L with L L' = Sigma_n^-1
  Eigen::VectorXd mu;          // mu_n
  double log_det_sigma_n = 0.0;
  double resid_quad = 0.0;  // R
  double log_marginal = 0.0;
  int n = 0;
};

/// Throws NumericalRankError when the posterior precision (or, for g-priors,
/// the Gram matrix) is not positive definite.
ConditionalPosterior conditional_posterior(const GaussianLinearStats& stats,
                                           const PriorCovInverse& pci,
                                           const PriorSpec& prior);

/// Convenience overload building the prior structure from the basis terms.
ConditionalPosterior conditional_posterior(const BasisSet& basis,
                                           const Eigen::VectorXd& y,
                                           const PriorSpec& prior,
                                           double g0sq);

/// Build the PriorCovInverse for a term list under the given spec.
PriorCovInverse prior_cov_inverse(const std::vector<MultiIndex>& indices,
                                  const PriorSpec& prior, double g0sq);

struct BetaSigmaDraw {
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
};

/// One sweep of the conjugate updates: sigma^2 from its inverse-gamma full
/// conditional using the residuals at beta_prev, then beta ~ N(mu_n,
/// sigma^2 Sigma_n). With prior.exact_sigma_conditional the sigma^2 update
/// also includes the prior quadratic form beta' S0^-1 beta and the (M+1)/2
/// shape correction.
BetaSigmaDraw gibbs_beta_sigma(const ConditionalPosterior& cp,
                               const Eigen::Ref<const Eigen::MatrixXd>& columns,
                               const Eigen::VectorXd& y,
                               const Eigen::VectorXd& beta_prev,
                               const PriorSpec& prior,
                               const PriorCovInverse& pci,
                               const Eigen::Ref<const Eigen::MatrixXd>& gram,
                               Rng& rng);

/// beta ~ N(mu_n, sigma^2 Sigma_n) given the factorized conditional.
Eigen::VectorXd draw_beta(const ConditionalPosterior& cp, double sigma2,
                          Rng& rng);

/// lambda | M ~ Gamma(a_M + M, b_M + 1).
double gibbs_lambda(int num_terms, const PriorSpec& prior, Rng& rng);

/// Inverse-gamma fit (a_hat, b_hat) approximating the conditional posterior
/// of g0^2.
struct LaplaceFit {
  double a_hat = 1.0;
  double b_hat = 1.0;
  double mode = 1.0;
  int iterations = 0;
};

/// Orthogonal-design Laplace approximation: fixed-point iteration for the
/// mode of
///   h(t) = -a_g log t - b_g / t - 1/2 sum_m log(1 + t g_m^2)
/// over the non-intercept shrink weights, then curvature-matched
/// inverse-gamma parameters a_hat = 2 + m^2/s^2, b_hat = m * a_hat.
/// With no non-intercept terms the posterior is the prior: returns
/// (a_g, b_g). Throws ConvergenceError (carrying the last iterate) if the
/// fixed point fails to settle within the iteration cap.
LaplaceFit laplace_g0(const Eigen::VectorXd& g_non_intercept,
                      const PriorSpec& prior);

/// General-design refinement: Newton-Raphson on the exact conditional
/// log-density of g0^2 (see mh_update_g0), starting from the orthogonal
/// solution, with step halving. g_full includes the intercept slot.
LaplaceFit laplace_g0_newton(const Eigen::VectorXd& g_full,
                             const GaussianLinearStats& stats,
                             const PriorSpec& prior);

/// Log-density (up to a constant) of the conditional posterior of g0^2 used
/// as the Metropolis-Hastings target. The intercept column is excluded from
/// the shrinkage structure, so with no non-intercept terms this reduces to
/// the Inv-Gamma(a_g, b_g) prior exactly.
double g0_log_target(double g0sq, const Eigen::VectorXd& g_full,
                     const GaussianLinearStats& stats, const PriorSpec& prior);

struct G0Update {
  double value = 1.0;
  bool accepted = false;
};

/// Metropolis-Hastings update of g0^2 with the Laplace approximation as the
/// proposal. Rejection returns the current value; it is not an error.
G0Update mh_update_g0(double current, const Eigen::VectorXd& g_full,
                      const GaussianLinearStats& stats, const PriorSpec& prior,
                      Rng& rng);

}  // namespace khaos
