#pragma once

#include <Eigen/Core>
#include <vector>

#include "khaos/multi_index.hpp"

namespace khaos {

/// An ordered collection of basis terms evaluated against one dataset:
/// position 0 is always the intercept. Caches the n x (M+1) design matrix
/// and its Gram matrix. Immutable after construction; safe to share.
class BasisSet {
 public:
  int n() const { return static_cast<int>(columns_.rows()); }
  int p() const { return p_; }
  /// Number of non-intercept terms.
  int num_terms() const { return static_cast<int>(indices_.size()) - 1; }
  /// Total number of columns (M+1).
  int num_columns() const { return static_cast<int>(indices_.size()); }

  const std::vector<MultiIndex>& indices() const { return indices_; }
  const Eigen::MatrixXd& columns() const { return columns_; }
  const Eigen::MatrixXd& gram() const { return gram_; }

  friend BasisSet build_design(const std::vector<MultiIndex>& indices,
                               const Eigen::MatrixXd& X);

 private:
  BasisSet() = default;
  int p_ = 0;
  std::vector<MultiIndex> indices_;
  Eigen::MatrixXd columns_;
  Eigen::MatrixXd gram_;
};

/// Evaluate the given terms on X (rows are points in [0,1]^p), prepending the
/// intercept when absent. Throws std::domain_error naming the offending
/// row/column if any entry of X lies outside [0,1], and
/// std::invalid_argument on duplicate terms or dimension mismatch.
BasisSet build_design(const std::vector<MultiIndex>& indices,
                      const Eigen::MatrixXd& X);

}  // namespace khaos
