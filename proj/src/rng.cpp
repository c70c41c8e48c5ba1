#include "khaos/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "khaos/stats.hpp"

namespace khaos {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  // xoshiro256++ state, expanded from the seed via SplitMix64.
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int lo, int hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: hi < lo");
  const std::uint64_t n = static_cast<std::uint64_t>(hi - lo) + 1;
  const auto wide = static_cast<unsigned __int128>(next_u64()) * n;
  return lo + static_cast<int>(wide >> 64);
}

double Rng::normal() { return normal_quantile(uniform_open()); }

double Rng::normal(double mu, double sigma) { return mu + sigma * normal(); }

double Rng::gamma(double shape, double rate) {
  if (shape <= 0.0 || rate <= 0.0)
    throw std::invalid_argument("gamma: shape and rate must be positive");
  if (shape < 1.0) {
    const double u = uniform_open();
    return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v / rate;
  }
}

double Rng::inv_gamma(double shape, double scale) {
  return scale / gamma(shape, 1.0);
}

double Rng::trunc_normal(double mu, double sigma, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("trunc_normal: hi <= lo");
  if (sigma <= 0.0) throw std::invalid_argument("trunc_normal: sigma <= 0");
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  double z;
  if (a >= 0.0) {
    // Right tail: work with upper-tail probabilities for accuracy.
    const double qa = normal_cdf(-a);
    const double qb = normal_cdf(-b);
    if (!(qa > qb)) return mu + sigma * a;  // span lost to underflow
    const double u = qb + (qa - qb) * uniform_open();
    z = -normal_quantile(u);
  } else if (b <= 0.0) {
    const double pa = normal_cdf(a);
    const double pb = normal_cdf(b);
    if (!(pb > pa)) return mu + sigma * b;
    const double u = pa + (pb - pa) * uniform_open();
    z = normal_quantile(u);
  } else {
    const double pa = normal_cdf(a);
    const double pb = normal_cdf(b);
    const double u = pa + (pb - pa) * uniform_open();
    z = normal_quantile(u);
  }
  // Guard against round-off pushing the draw outside the interval.
  z = std::min(std::max(z, a), b);
  return mu + sigma * z;
}

int Rng::categorical(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("categorical: empty");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w))
      throw std::invalid_argument("categorical: bad weight");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("categorical: zero mass");
  const double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

std::uint64_t Rng::derive_seed(std::uint64_t seed,
                               std::span<const std::uint64_t> path) {
  std::uint64_t state = seed ^ 0x6a09e667f3bcc909ull;
  for (std::uint64_t k : path) {
    std::uint64_t component = k;
    state ^= splitmix64(component);
    std::uint64_t carry = state;
    state = splitmix64(carry);
  }
  std::uint64_t fin = state;
  return splitmix64(fin);
}

}  // namespace khaos
