#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "khaos/candidate_space.hpp"
#include "khaos/coinflip_proposal.hpp"
#include "khaos/multi_index.hpp"
#include "khaos/prior.hpp"
#include "khaos/rng.hpp"

using namespace khaos;
using namespace khaos::proposal;

namespace {

PriorSpec make_prior(int d_max, int q_max, double s_q = 1.0,
                     double s_d = 1.0) {
  PriorSpec prior;
  prior.d_max = d_max;
  prior.q_max = q_max;
  prior.s_q = s_q;
  prior.s_d = s_d;
  return prior;
}

// Enumeration oracle for P(1 <= sum chi <= q_max) over all 2^p outcomes.
double valid_prob_enumeration(const Eigen::VectorXd& eta, int q_max) {
  const int p = static_cast<int>(eta.size());
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    int bits = 0;
    double prob = 1.0;
    for (int j = 0; j < p; ++j) {
      if (mask & (1u << j)) {
        prob *= eta[j];
        ++bits;
      } else {
        prob *= (1.0 - eta[j]);
      }
    }
    if (bits >= 1 && bits <= q_max) total += prob;
  }
  return total;
}

}  // namespace

TEST_CASE("eta weights") {
  SUBCASE("uniform counts give q0/p") {
    const auto eta = eta_weights(2, {3, 3, 3, 3}, 4);
    for (int j = 0; j < 4; ++j)
      CHECK(eta[j] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eta.sum() == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("proportional to counts plus baseline") {
    const auto eta = eta_weights(1, {5, 0, 0}, 3);
    CHECK(eta[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(eta[1] == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(eta[2] == doctest::Approx(0.125).epsilon(1e-12));
  }
  SUBCASE("upper clipping redistributes the excess; sum preserved") {
    const auto eta = eta_weights(2, {1000, 0, 0}, 3);
    CHECK(eta[0] == doctest::Approx(1.0 - kEtaEps).epsilon(1e-12));
    CHECK(eta[1] == doctest::Approx(eta[2]).epsilon(1e-12));
    CHECK(std::abs(eta.sum() - 2.0) < 1e-12);
    CHECK(eta.maxCoeff() <= 1.0 - kEtaEps + 1e-15);
    CHECK(eta.minCoeff() >= kEtaEps - 1e-18);
  }
  SUBCASE("lower clipping") {
    const auto eta = eta_weights(1, {2000000, 0, 0, 0}, 4);
    CHECK(eta.minCoeff() >= kEtaEps - 1e-18);
    CHECK(std::abs(eta.sum() - 1.0) < 1e-12);
  }
  SUBCASE("monotone in activity") {
    const auto eta = eta_weights(2, {7, 3, 3, 0}, 4);
    CHECK(eta[0] > eta[1]);
    CHECK(eta[1] == doctest::Approx(eta[2]).epsilon(1e-12));
    CHECK(eta[2] > eta[3]);
  }
}

TEST_CASE("Poisson-Binomial validity probability") {
  Rng rng(99);
  SUBCASE("dynamic program equals 2^p enumeration") {
    for (int p = 1; p <= 12; ++p) {
      for (int q_max = 1; q_max <= std::min(p, 4); ++q_max) {
        for (int rep = 0; rep < 10; ++rep) {
          Eigen::VectorXd eta(p);
          for (int j = 0; j < p; ++j)
            eta[j] = kEtaEps + (1.0 - 2.0 * kEtaEps) * rng.uniform();
          const double dp = valid_flip_prob(eta, q_max);
          const double brute = valid_prob_enumeration(eta, q_max);
          CHECK(std::abs(dp - brute) < 1e-12);
        }
      }
    }
  }
  SUBCASE("normal approximation branch is close for large p") {
    const int p = 600;  // beyond the exact limit
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(p, 2.0 / p);
    const double approx = valid_flip_prob(eta, 4);
    const double exact = valid_flip_prob(eta, 4, /*exact_limit=*/1000);
    CHECK(std::abs(approx - exact) < 0.05);
  }
}

TEST_CASE("variable swap probabilities") {
  SUBCASE("singleton supports are point masses") {
    const MultiIndex term({2, 0});
    const auto probs = variable_swap_probs(term, 0, 1, {1, 0});
    CHECK(probs.forward == doctest::Approx(1.0));
    CHECK(probs.reverse == doctest::Approx(1.0));
  }
  SUBCASE("single-term state swaps are symmetric") {
    const MultiIndex term({0, 3, 0, 0});
    const auto probs = variable_swap_probs(term, 1, 2, {0, 1, 0, 0});
    CHECK(probs.reverse == doctest::Approx(probs.forward).epsilon(1e-14));
  }
  SUBCASE("asymmetric counts shift the ratio") {
    const MultiIndex term({1, 0, 0});
    const auto probs = variable_swap_probs(term, 0, 1, {1, 9, 0});
    CHECK(probs.forward > probs.reverse);
  }
}

TEST_CASE("birth/death proposal-correction reciprocity") {
  // Keystone property: adding alpha* from any frozen state and deleting it
  // again must cancel exactly when the death side is evaluated against the
  // same reverse context. Exercises the Poisson-Binomial normalizers and
  // the q0 marginalization together.
  Rng rng(4242);
  const double p_birth = 1.0 / 3.0;
  const double p_death = 1.0 / 3.0;
  const int dims[] = {1, 2, 5, 20};
  int tested = 0;
  for (int p : dims) {
    const PriorSpec prior = make_prior(/*d_max=*/6, std::min(3, p));
    for (int rep = 0; rep < 250; ++rep) {
      std::vector<int> counts(static_cast<std::size_t>(p), 0);
      for (int j = 0; j < p; ++j)
        counts[static_cast<std::size_t>(j)] = rng.uniform_int(0, 6);
      const int m = rng.uniform_int(0, 12);

      const int qm = std::min(prior.q_max, p);
      const int q = rng.uniform_int(1, qm);
      const int d = rng.uniform_int(q, prior.d_max);
      std::vector<int> vars;
      while (static_cast<int>(vars.size()) < q) {
        const int v = rng.uniform_int(0, p - 1);
        bool dup = false;
        for (int u : vars) dup = dup || (u == v);
        if (!dup) vars.push_back(v);
      }
      const auto parts = sample_composition(d, q, rng);
      std::vector<int> degrees(static_cast<std::size_t>(p), 0);
      for (int k = 0; k < q; ++k)
        degrees[static_cast<std::size_t>(vars[static_cast<std::size_t>(k)])] =
            parts[static_cast<std::size_t>(k)];
      const MultiIndex alpha(degrees);

      const double log_birth =
          log_birth_correction(alpha, counts, m, p_birth, p_death, prior);
      const double log_death = log_death_correction(alpha, counts, m + 1,
                                                    p_birth, p_death, prior);
      CHECK(std::abs(log_birth + log_death) < 1e-10);
      ++tested;
    }
  }
  CHECK(tested == 1000);
}

TEST_CASE("degenerate one-dimensional birth reduces to degree sampling") {
  const PriorSpec prior = make_prior(/*d_max=*/4, /*q_max=*/1);
  const std::vector<int> counts{3};
  const double c_d = 1.0 + 0.5 + 1.0 / 3.0 + 0.25;
  for (int d = 1; d <= 4; ++d) {
    const double mass = std::exp(
        log_birth_mass(MultiIndex(std::vector<int>{d}), counts, prior));
    CHECK(mass == doctest::Approx((1.0 / d) / c_d).epsilon(1e-10));
  }
  const double corr = log_birth_correction(MultiIndex(std::vector<int>{2}),
                                           counts, 0, 1.0 / 3.0, 1.0 / 3.0,
                                           prior);
  CHECK(corr == doctest::Approx(std::log(2.0 * c_d)).epsilon(1e-10));
}

TEST_CASE("partition factor enters through the composition count") {
  const PriorSpec prior = make_prior(4, 2);
  const std::vector<int> counts{0, 0};
  const double m_41 = log_birth_mass(MultiIndex({3, 1}), counts, prior);
  const double m_22 = log_birth_mass(MultiIndex({2, 2}), counts, prior);
  CHECK(m_41 == doctest::Approx(m_22).epsilon(1e-12));
  const double m_11 = log_birth_mass(MultiIndex({1, 1}), counts, prior);
  CHECK(m_11 - m_41 ==
        doctest::Approx(std::log(3.0) + prior.s_d * std::log(4.0 / 2.0))
            .epsilon(1e-10));
}

TEST_CASE("empirical birth frequencies match the analytic mass") {
  const PriorSpec prior = make_prior(2, 2);
  const std::vector<int> counts{2, 0};
  Rng rng(31337);

  const auto candidates = enumerate_candidates(CandidateSpace(2, 2, 2));
  std::map<std::vector<int>, long> freq;
  const int total = 100000;
  int abandoned = 0;
  for (int k = 0; k < total; ++k) {
    const auto draw = draw_birth_candidate(counts, prior, 2, 10, rng);
    if (!draw.alpha) {
      ++abandoned;
      continue;
    }
    freq[draw.alpha->degrees()]++;
  }
  CHECK(abandoned < total / 100);

  const long kept = total - abandoned;
  double mass_total = 0.0;
  for (const auto& mi : candidates) {
    const double mass = std::exp(log_birth_mass(mi, counts, prior));
    mass_total += mass;
    const double observed =
        static_cast<double>(freq[mi.degrees()]) / static_cast<double>(kept);
    const double se =
        std::sqrt(mass * (1.0 - mass) / static_cast<double>(kept));
    CHECK(std::abs(observed - mass) < 3.0 * se + 1e-6);
  }
  // Conditional on a successful draw the marginalized masses sum to one.
  CHECK(mass_total == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("empirical swap draw matches the categorical weights") {
  const MultiIndex term({2, 0, 0, 0, 0});
  const std::vector<int> counts{1, 4, 0, 2, 1};
  Rng rng(606);
  const double weights[] = {5.0, 1.0, 3.0, 2.0};  // counts + 1 on inactive
  const double wsum = 11.0;
  std::map<int, long> freq;
  const int total = 100000;
  for (int k = 0; k < total; ++k) {
    std::vector<double> w(std::begin(weights), std::end(weights));
    freq[rng.categorical(w)]++;
  }
  for (int j = 0; j < 4; ++j) {
    const double expected = weights[j] / wsum;
    const double observed =
        static_cast<double>(freq[j]) / static_cast<double>(total);
    const double se =
        std::sqrt(expected * (1.0 - expected) / static_cast<double>(total));
    CHECK(std::abs(observed - expected) < 3.0 * se + 1e-6);
  }
  const auto probs = variable_swap_probs(term, 0, 1, counts);
  CHECK(probs.forward == doctest::Approx(5.0 / 11.0).epsilon(1e-12));
}
