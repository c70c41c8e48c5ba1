#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace khaos {

/// A tensor-product basis function is identified by its vector of per-input
/// polynomial degrees. The all-zeros multi-index is the intercept.
///
/// degree = sum of entries, order = number of nonzero entries.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> degrees);

  /// Intercept term (all degrees zero) in dimension p.
  static MultiIndex intercept(int p);

  int dim() const { return static_cast<int>(alpha_.size()); }
  int degree() const { return degree_; }
  int order() const { return order_; }
  bool is_intercept() const { return order_ == 0; }

  int operator[](int j) const { return alpha_[static_cast<std::size_t>(j)]; }
  const std::vector<int>& degrees() const { return alpha_; }

  /// Indices of the active (nonzero-degree) inputs, ascending.
  std::vector<int> active() const;

  bool operator==(const MultiIndex& other) const {
    return alpha_ == other.alpha_;
  }
  bool operator!=(const MultiIndex& other) const { return !(*this == other); }

  /// Graded ordering used for candidate enumeration and tie-breaking:
  /// ascending total degree, then descending entrywise comparison (so (1,0)
  /// precedes (0,1)).
  bool graded_before(const MultiIndex& other) const;

 private:
  std::vector<int> alpha_;
  int degree_ = 0;
  int order_ = 0;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& mi) const {
    std::size_t h = 0x811c9dc5u ^ static_cast<std::size_t>(mi.dim());
    for (int a : mi.degrees()) {
      h ^= static_cast<std::size_t>(a) + 0x9e3779b9u + (h << 6) + (h >> 2);
    }
    return h;
  }
};

}  // namespace khaos
