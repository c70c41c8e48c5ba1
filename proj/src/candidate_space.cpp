#include "khaos/candidate_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "khaos/errors.hpp"
#include "khaos/stats.hpp"

namespace khaos {

namespace {

// Exact C(n,k) with overflow detection.
std::uint64_t binom_u64(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    // out * num / i is always integral at this point.
    if (out > std::numeric_limits<std::uint64_t>::max() / num)
      throw std::overflow_error("binomial coefficient overflows 64 bits");
    out = out * num / static_cast<std::uint64_t>(i);
  }
  return out;
}

void enumerate_rec(int pos, int deg_left, int order_left, int p,
                   std::vector<int>& current, std::vector<MultiIndex>& out) {
  if (pos == p) {
    if (deg_left == 0) out.emplace_back(current);
    return;
  }
  for (int a = deg_left; a >= 0; --a) {  // descending => graded order below
    if (a > 0 && order_left == 0) continue;
    current[static_cast<std::size_t>(pos)] = a;
    enumerate_rec(pos + 1, deg_left - a, order_left - (a > 0 ? 1 : 0), p,
                  current, out);
  }
  current[static_cast<std::size_t>(pos)] = 0;
}

}  // namespace

CandidateSpace::CandidateSpace(int p_in, int d_max_in, int q_max_in)
    : p(p_in), d_max(d_max_in), q_max(q_max_in) {
  if (p < 1) throw std::invalid_argument("CandidateSpace: p must be >= 1");
  if (q_max < 1 || q_max > std::min(p, d_max))
    throw std::invalid_argument(
        "CandidateSpace: need 1 <= q_max <= min(p, d_max)");
}

std::uint64_t cardinality(const CandidateSpace& space) {
  std::uint64_t total = 0;
  for (int i = 1; i <= space.q_max; ++i) {
    const std::uint64_t choose_vars = binom_u64(space.p, i);
    std::uint64_t partitions = 0;
    for (int j = 1; j <= space.d_max; ++j) partitions += binom_u64(j - 1, i - 1);
    if (choose_vars != 0 &&
        partitions > std::numeric_limits<std::uint64_t>::max() / choose_vars)
      throw std::overflow_error("cardinality overflows 64 bits");
    total += choose_vars * partitions;
  }
  return total;
}

double log_cardinality(const CandidateSpace& space) {
  std::vector<double> terms;
  for (int i = 1; i <= space.q_max; ++i) {
    for (int j = i; j <= space.d_max; ++j) {
      terms.push_back(log_binomial(space.p, i) + log_binomial(j - 1, i - 1));
    }
  }
  return log_sum_exp(terms);
}

std::vector<MultiIndex> enumerate_candidates(const CandidateSpace& space,
                                             std::uint64_t cap) {
  const std::uint64_t count = cardinality(space);
  if (count > cap)
    throw CapacityError("enumerate_candidates: cardinality " +
                        std::to_string(count) + " exceeds cap " +
                        std::to_string(cap));
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> current(static_cast<std::size_t>(space.p), 0);
  // Enumerate degree grades in ascending order; within a grade the recursion
  // emits entrywise-descending vectors.
  for (int d = 1; d <= space.d_max; ++d) {
    enumerate_rec(0, d, space.q_max, space.p, current, out);
  }
  return out;
}

std::uint64_t count_compositions(int d, int q) {
  if (q < 1 || d < q)
    throw std::invalid_argument("count_compositions: need d >= q >= 1");
  return binom_u64(d - 1, q - 1);
}

double log_count_compositions(int d, int q) {
  if (q < 1 || d < q)
    throw std::invalid_argument("count_compositions: need d >= q >= 1");
  return log_binomial(d - 1, q - 1);
}

std::vector<int> sample_composition(int d, int q, Rng& rng) {
  if (q < 1 || d < q)
    throw std::invalid_argument("sample_composition: need d >= q >= 1");
  if (q == 1) return {d};
  // Floyd's algorithm: q-1 distinct cut points uniform over {1, ..., d-1}.
  std::vector<int> cuts;
  cuts.reserve(static_cast<std::size_t>(q - 1));
  for (int j = d - 1 - (q - 1) + 1; j <= d - 1; ++j) {
    const int t = rng.uniform_int(1, j);
    if (std::find(cuts.begin(), cuts.end(), t) == cuts.end()) {
      cuts.push_back(t);
    } else {
      cuts.push_back(j);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<int> parts(static_cast<std::size_t>(q));
  int prev = 0;
  for (int i = 0; i < q - 1; ++i) {
    parts[static_cast<std::size_t>(i)] = cuts[static_cast<std::size_t>(i)] - prev;
    prev = cuts[static_cast<std::size_t>(i)];
  }
  parts[static_cast<std::size_t>(q - 1)] = d - prev;
  return parts;
}

}  // namespace khaos
