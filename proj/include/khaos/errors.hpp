#pragma once

#include <stdexcept>
#include <string>

namespace khaos {

/// Rank deficiency detected while factorizing a model (Cholesky failure).
/// The sampler treats this as an automatic move rejection; everywhere else
/// it propagates to the caller.
class NumericalRankError : public std::runtime_error {
 public:
  explicit NumericalRankError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Iterative scheme failed to converge. Carries the last iterate so callers
/// can degrade gracefully (e.g. fall back to the prior as a proposal).
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_iterate)
      : std::runtime_error(what), last_iterate_(last_iterate) {}
  double last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_iterate_;
};

/// A requested enumeration or candidate set exceeds a configured cap.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace khaos
