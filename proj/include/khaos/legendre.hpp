#pragma once

#include <Eigen/Core>

#include "khaos/multi_index.hpp"

namespace khaos {

/// Largest polynomial degree the evaluator will accept.
inline constexpr int kMaxLegendreDegree = 50;

/// Standardized shifted-Legendre polynomial on [0,1]:
///   psi_d(x) = sqrt(2d+1) * P_d(2x-1),
/// with P_d given by the usual three-term recurrence
///   (d+1) P_{d+1}(t) = (2d+1) t P_d(t) - d P_{d-1}(t),  P_0 = 1, P_1(t) = t.
/// The family is orthonormal under the uniform measure on [0,1].
///
/// Callers must supply x in [0,1]; degrees above kMaxLegendreDegree throw.
double legendre_shifted(int degree, double x);

/// Tensor-product basis value: product of legendre_shifted over the active
/// coordinates of the multi-index (inactive coordinates contribute 1).
/// Throws std::invalid_argument on dimension mismatch.
double evaluate_basis(const MultiIndex& mi, const Eigen::VectorXd& x);

/// Per-dataset cache of psi_d(x_ij) for all rows, variables and degrees up to
/// d_max. Basis columns for any multi-index are then an elementwise product
/// of cached columns; this is what makes repeated evaluation during MCMC
/// cheap. Immutable after construction.
class LegendreTable {
 public:
  LegendreTable(const Eigen::MatrixXd& X, int d_max);

  int rows() const { return n_; }
  int dim() const { return p_; }
  int max_degree() const { return d_max_; }

  /// Column of evaluated basis values for one multi-index.
  Eigen::VectorXd column(const MultiIndex& mi) const;
  void column_into(const MultiIndex& mi, Eigen::Ref<Eigen::VectorXd> out) const;

 private:
  int n_ = 0;
  int p_ = 0;
  int d_max_ = 0;
  // One (n x d_max+1) block per variable.
  std::vector<Eigen::MatrixXd> values_;
};

}  // namespace khaos
