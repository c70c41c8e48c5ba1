#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "khaos/multi_index.hpp"

namespace khaos {

enum class PriorFamily { kRidge, kGPrior, kModifiedGPrior };

std::string to_string(PriorFamily family);
PriorFamily prior_family_from_string(const std::string& name);

/// Hyperparameters for the coefficient priors and the model-space prior.
///
/// Unless noted, defaults follow the convention used throughout this
/// project: a_M = b_M = 1 (Gamma prior on the basis-count rate), vague
/// a_sigma = b_sigma = 0.01 on the noise variance, a_g = b_g = 1 on the
/// global shrinkage factor, complexity exponent zeta = 1, and a vague ridge
/// scale tau2 = 1e5 (prior coefficient variance sigma^2 * tau2).
struct PriorSpec {
  PriorFamily family = PriorFamily::kModifiedGPrior;

  double a_M = 1.0;
  double b_M = 1.0;
  double a_sigma = 0.01;
  double b_sigma = 0.01;
  double a_g = 1.0;
  double b_g = 1.0;
  double zeta = 1.0;
  double tau2 = 1e5;

  int d_max = 12;
  int q_max = 3;

  double s_q = 1.0;
  double s_d = 1.0;

  /// Use the exact sigma^2 full conditional (adds the prior quadratic form
  /// and the (M+1)/2 shape correction). Off by default: the plain residual
  /// update is the reference behaviour.
  bool exact_sigma_conditional = false;

  /// When set, sigma^2 is pinned to this value (latent-response models use
  /// 1.0) and the noise-variance Gibbs step is skipped.
  std::optional<double> fixed_sigma2;

  void validate() const;

  /// zeta used for shrink weights; the plain g-prior family is the zeta = 0
  /// special case of the modified prior.
  double effective_zeta() const {
    return family == PriorFamily::kGPrior ? 0.0 : zeta;
  }
  bool has_g_structure() const { return family != PriorFamily::kRidge; }
};

/// Complexity-based shrink weight for one basis term:
///   g_m = (1 / (1 + q * (d + q - 2)))^(zeta/2),
/// where d and q are the term's degree and order. The intercept (q = 0) and
/// plain linear terms (q = d = 1) get weight 1.
double shrink_weight(const MultiIndex& mi, double zeta);

/// Shrink weights for a full column list (intercept included, weight 1).
Eigen::VectorXd shrink_weights(const std::vector<MultiIndex>& indices,
                               double zeta);

/// The prior inverse-covariance structure behind Sigma_n = (Psi'Psi + S0^-1)^-1.
///
/// For the ridge family S0 = tau2 * I, so the posterior precision is the Gram
/// matrix plus a diagonal. For the g-prior families S0 = g0^2 D(g) (Psi'Psi)^-1
/// D(g), and the posterior precision is the elementwise product G .* Psi'Psi
/// with G_ml = (g0^2 g_m g_l + 1) / (g0^2 g_m g_l).
class PriorCovInverse {
 public:
  static PriorCovInverse ridge(double tau2);
  /// Raw structure with every column (including any intercept slot) in the
  /// shrinkage block.
  static PriorCovInverse gprior(Eigen::VectorXd g, double g0sq);
  /// Model form: column 0 is the intercept and stays outside the shrinkage
  /// block with a fixed vague prior variance tau0sq; the G scaling applies
  /// to the remaining block. Shrinking the mean level itself degenerates the
  /// sampler whenever g0^2 is small, and the classical g-prior leaves the
  /// intercept unpenalized.
  static PriorCovInverse gprior_flat_intercept(Eigen::VectorXd g, double g0sq,
                                               double tau0sq);

  bool is_ridge() const { return mode_ == Mode::kRidge; }
  bool flat_intercept() const { return mode_ == Mode::kGPriorFlatIntercept; }

  /// Posterior precision matrix A = Psi'Psi + S0^-1 for the given Gram matrix.
  Eigen::MatrixXd posterior_precision(const Eigen::MatrixXd& gram) const;

  /// G factor with elements (g0^2 g_m g_l + 1)/(g0^2 g_m g_l); g-prior only.
  Eigen::MatrixXd g_factor() const;

  /// log |S0|. The g-prior determinant needs the log determinant of the
  /// Gram matrix (full matrix for the raw structure, the non-intercept
  /// block for the flat-intercept form) from the caller.
  double log_det_S0(int m1, double log_det_gram) const;

  /// S0^-1 as an explicit matrix (ridge: diagonal; g-prior: derived from the
  /// Gram matrix). Mostly for tests and the exact sigma^2 conditional.
  Eigen::MatrixXd s0_inverse(const Eigen::MatrixXd& gram) const;

 private:
  enum class Mode { kRidge, kGPriorFull, kGPriorFlatIntercept };
  PriorCovInverse() = default;
  Mode mode_ = Mode::kRidge;
  double tau2_ = 1e5;   // ridge scale, or the flat-intercept variance
  double g0sq_ = 1.0;
  Eigen::VectorXd g_;
};

}  // namespace khaos
