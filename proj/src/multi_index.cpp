#include "khaos/multi_index.hpp"

#include <stdexcept>
#include <utility>

namespace khaos {

MultiIndex::MultiIndex(std::vector<int> degrees) : alpha_(std::move(degrees)) {
  if (alpha_.empty())
    throw std::invalid_argument("MultiIndex: dimension must be positive");
  for (int a : alpha_) {
    if (a < 0) throw std::invalid_argument("MultiIndex: negative degree");
    degree_ += a;
    if (a > 0) ++order_;
  }
}

MultiIndex MultiIndex::intercept(int p) {
  if (p <= 0) throw std::invalid_argument("MultiIndex: p must be positive");
  return MultiIndex(std::vector<int>(static_cast<std::size_t>(p), 0));
}

std::vector<int> MultiIndex::active() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(order_));
  for (int j = 0; j < dim(); ++j) {
    if (alpha_[static_cast<std::size_t>(j)] > 0) out.push_back(j);
  }
  return out;
}

bool MultiIndex::graded_before(const MultiIndex& other) const {
  if (degree_ != other.degree_) return degree_ < other.degree_;
  return alpha_ > other.alpha_;  // descending lexicographic within a grade
}

}  // namespace khaos
