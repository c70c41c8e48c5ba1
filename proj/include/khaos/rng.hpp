#pragma once

#include <cstdint>
#include <span>

namespace khaos {

/// Deterministic random number stream (xoshiro-free: a raw SplitMix64-seeded
/// Mersenne Twister would also work, but all variates here are generated by
/// inverse-CDF or explicit rejection so the sequence is fully reproducible
/// for a given seed and call order).
///
/// One Rng per chain; never shared across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on [0,1) with 53-bit resolution.
  double uniform();
  /// Uniform on the open interval (0,1); safe for inverse-CDF sampling.
  double uniform_open();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in {lo, ..., hi} inclusive.
  int uniform_int(int lo, int hi);

  double normal();  // N(0,1) by inverse CDF
  double normal(double mu, double sigma);

  /// Gamma(shape, rate); Marsaglia-Tsang squeeze with the shape<1 boost.
  double gamma(double shape, double rate);
  /// Inverse-Gamma(shape a, scale b), density prop. to x^{-a-1} e^{-b/x}.
  double inv_gamma(double shape, double scale);

  /// N(mu, sigma^2) truncated to (lo, hi]; inverse-CDF with tail-stable
  /// complementary forms.
  double trunc_normal(double mu, double sigma, double lo, double hi);

  /// Index sampled proportional to the (unnormalized, nonnegative) weights.
  int categorical(std::span<const double> weights);

  /// Derive an independent child stream; used for per-cell seeding in the
  /// benchmark so results do not depend on execution order.
  static std::uint64_t derive_seed(std::uint64_t seed,
                                   std::span<const std::uint64_t> path);

 private:
  std::uint64_t s_[4];
};

}  // namespace khaos
