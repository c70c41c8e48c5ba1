#include "khaos/basis_set.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "khaos/legendre.hpp"

namespace khaos {

namespace {

struct MiEq {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const {
    return a == b;
  }
};

}  // namespace

BasisSet build_design(const std::vector<MultiIndex>& indices,
                      const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (n == 0 || p == 0) throw std::invalid_argument("build_design: empty X");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      const double v = X(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw std::domain_error("build_design: X(" + std::to_string(i) + "," +
                                std::to_string(j) + ") = " + std::to_string(v) +
                                " outside [0,1]");
    }
  }

  BasisSet out;
  out.p_ = p;
  out.indices_.push_back(MultiIndex::intercept(p));
  int d_max = 0;
  std::unordered_set<MultiIndex, MultiIndexHash, MiEq> seen;
  for (const auto& mi : indices) {
    if (mi.dim() != p)
      throw std::invalid_argument("build_design: multi-index dimension " +
                                  std::to_string(mi.dim()) +
                                  " does not match X");
    if (mi.is_intercept()) continue;  // intercept handled above
    if (!seen.insert(mi).second)
      throw std::invalid_argument("build_design: duplicate multi-index");
    for (int j = 0; j < p; ++j) d_max = std::max(d_max, mi[j]);
    out.indices_.push_back(mi);
  }

  const LegendreTable table(X, d_max);
  const int m1 = static_cast<int>(out.indices_.size());
  out.columns_.resize(n, m1);
  for (int c = 0; c < m1; ++c) {
    table.column_into(out.indices_[static_cast<std::size_t>(c)],
                      out.columns_.col(c));
  }
  out.gram_.noalias() = out.columns_.transpose() * out.columns_;
  // Symmetrize away accumulation noise.
  out.gram_ = 0.5 * (out.gram_ + out.gram_.transpose()).eval();
  return out;
}

}  // namespace khaos
