#pragma once

#include <cstdint>
#include <vector>

#include "khaos/multi_index.hpp"
#include "khaos/rng.hpp"

namespace khaos {

/// The admissible set of non-intercept basis terms: all multi-indices in
/// dimension p with total degree <= d_max and interaction order <= q_max.
struct CandidateSpace {
  int p;
  int d_max;
  int q_max;

  CandidateSpace(int p_in, int d_max_in, int q_max_in);
};

/// Number of admissible terms (intercept excluded):
///   sum_{i=1..q_max} sum_{j=1..d_max} C(p,i) C(j-1,i-1).
/// Throws std::overflow_error if the count does not fit in 64 bits.
std::uint64_t cardinality(const CandidateSpace& space);

/// log of cardinality, computed in log space (usable when the count itself
/// would overflow).
double log_cardinality(const CandidateSpace& space);

/// All admissible multi-indices in graded order (degree ascending, then
/// entrywise descending). Throws CapacityError when the cardinality exceeds
/// the cap.
std::vector<MultiIndex> enumerate_candidates(const CandidateSpace& space,
                                             std::uint64_t cap = 1000000);

/// Number of ways to split total degree d into q positive parts: C(d-1,q-1).
/// Requires d >= q >= 1.
std::uint64_t count_compositions(int d, int q);
double log_count_compositions(int d, int q);

/// Uniform draw over the C(d-1,q-1) compositions of d into q positive parts
/// (stars and bars: q-1 distinct cut points in {1..d-1}).
std::vector<int> sample_composition(int d, int q, Rng& rng);

}  // namespace khaos
