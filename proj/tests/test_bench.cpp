#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "khaos/benchmark.hpp"
#include "khaos/crps.hpp"
#include "khaos/csv.hpp"
#include "khaos/lhs.hpp"
#include "khaos/rng.hpp"
#include "khaos/stats.hpp"
#include "khaos/test_functions.hpp"

using namespace khaos;

TEST_CASE("latin hypercube structure") {
  Rng rng(1);
  SUBCASE("n=2, p=1 occupies both strata") {
    const Eigen::MatrixXd d = latin_hypercube(2, 1, rng);
    const bool low0 = d(0, 0) < 0.5;
    const bool low1 = d(1, 0) < 0.5;
    CHECK(low0 != low1);
  }
  SUBCASE("ranks are a permutation in every column") {
    for (int rep = 0; rep < 5; ++rep) {
      const int n = 37;
      const Eigen::MatrixXd d = maximin_lhs(n, 3, rng, 2);
      for (int j = 0; j < 3; ++j) {
        std::set<int> strata;
        for (int i = 0; i < n; ++i) {
          CHECK(d(i, j) >= 0.0);
          CHECK(d(i, j) < 1.0);
          strata.insert(static_cast<int>(d(i, j) * n));
        }
        CHECK(strata.size() == static_cast<std::size_t>(n));
      }
    }
  }
  SUBCASE("swap ascent never loses to a plain hypercube") {
    int wins = 0;
    for (int seed = 0; seed < 100; ++seed) {
      Rng a(seed);
      Rng b(seed);
      const double plain = min_pairwise_distance(latin_hypercube(25, 2, a));
      const double optimized =
          min_pairwise_distance(maximin_lhs(25, 2, b, 5));
      if (optimized >= plain) ++wins;
    }
    CHECK(wins >= 99);
  }
}

TEST_CASE("CRPS estimator") {
  SUBCASE("degenerate samples reduce to absolute error") {
    const std::vector<double> samples(8, 2.5);
    CHECK(crps_from_samples(samples, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(crps_from_samples(samples, 2.5) == doctest::Approx(0.0));
  }
  SUBCASE("two-point example") {
    const std::vector<double> samples{0.0, 1.0};
    CHECK(crps_from_samples(samples, 0.0) ==
          doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("matches the closed-form Gaussian CRPS") {
    Rng rng(5);
    const int m = 100000;
    std::vector<double> samples(m);
    for (int i = 0; i < m; ++i) samples[i] = rng.normal();
    for (double y : {0.0, 0.7, -1.3}) {
      const double estimate = crps_from_samples(samples, y);
      const double z = y;  // mu = 0, sigma = 1
      const double closed =
          z * (2.0 * normal_cdf(z) - 1.0) +
          2.0 * std::exp(normal_log_pdf(z)) -
          1.0 / std::sqrt(3.14159265358979323846);
      CHECK(std::abs(estimate - closed) < 1e-3);
    }
  }
  SUBCASE("m < 2 is rejected") {
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(crps_from_samples(one, 0.0), std::invalid_argument);
  }
  SUBCASE("quadratic-cost identity on small samples") {
    // O(m log m) path equals the direct double sum.
    Rng rng(9);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> s(13);
      for (auto& v : s) v = rng.normal();
      const double y = rng.normal();
      double term1 = 0.0, term2 = 0.0;
      for (double a : s) {
        term1 += std::abs(a - y);
        for (double b : s) term2 += std::abs(a - b);
      }
      const double direct = term1 / s.size() -
                            term2 / (2.0 * s.size() * s.size());
      CHECK(crps_from_samples(s, y) == doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("test function registry") {
  Rng rng(31);
  for (const auto& fn : test_function_registry()) {
    Eigen::VectorXd u(fn.p);
    for (int rep = 0; rep < 2000; ++rep) {
      for (int j = 0; j < fn.p; ++j) u[j] = rng.uniform();
      const double v = fn.evaluate(u);
      CHECK(std::isfinite(v));
    }
    const double var = function_variance(fn, 20000);
    CHECK(std::isfinite(var));
    CHECK(var > 0.0);
  }
  CHECK(test_function("banana").p == 2);
  CHECK(test_function("friedman20").p == 20);
  CHECK_THROWS_AS(test_function("nope"), std::invalid_argument);

  SUBCASE("ishigami matches the reference formula at a point") {
    const auto& fn = test_function("ishigami");
    Eigen::VectorXd u(3);
    u << 0.75, 0.5, 1.0;  // x = (pi/2, 0, pi)
    const double pi = 3.14159265358979323846;
    const double expect = 1.0 + 0.1 * pi * pi * pi * pi;
    CHECK(fn.evaluate(u) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("benchmark smoke run is reproducible and well-formed") {
  BenchConfig config;
  config.functions = {"banana"};
  config.methods = {"khaos-ridge", "sparse-pce"};
  config.nsr_levels = {0.5};
  config.replicates = 2;
  config.n_train = 120;
  config.n_test = 80;
  config.seed = 5;
  config.crps_samples = 120;
  config.sampler.n_iter = 800;
  config.sampler.n_burn = 400;
  config.sampler.n_thin = 4;
  config.ridge_prior.d_max = 5;
  config.ridge_prior.q_max = 2;
  config.sparse.initial_d_max = 2;

  const BenchOutput a = run_benchmark(config);
  const BenchOutput b = run_benchmark(config);
  REQUIRE(a.results.size() == 4);
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    CHECK_FALSE(a.results[i].failed);
    CHECK(a.results[i].avg_crps >= 0.0);
    CHECK(a.results[i].avg_crps == b.results[i].avg_crps);  // bitwise
  }
  // Within-1% flag: exactly the per-replicate winners are flagged.
  for (int rep = 0; rep < 2; ++rep) {
    double best = 1e300;
    for (const auto& r : a.results)
      if (r.replicate == rep) best = std::min(best, r.avg_crps);
    for (const auto& r : a.results) {
      if (r.replicate != rep) continue;
      CHECK(r.within_one_percent == (r.avg_crps <= 1.01 * best));
    }
  }
  // Ranks: two methods, mean rank in [1, 2] and they sum to 3 per function.
  REQUIRE(a.ranks.size() == 2);
  CHECK(a.ranks[0].avg_rank + a.ranks[1].avg_rank == doctest::Approx(3.0));

  SUBCASE("CSV emission carries the seed header and parses back") {
    std::ostringstream os;
    write_results_csv(os, a, config);
    std::istringstream is(os.str());
    const CsvTable table = read_csv(is);
    CHECK(table.nrow() == 4);
    CHECK(table.column_index("avg_crps") >= 0);
    CHECK(os.str().rfind("# khaos benchmark results; seed=5 config_hash=", 0) == 0);
  }
}

TEST_CASE("unknown methods are recorded as failures without aborting") {
  BenchConfig config;
  config.functions = {"banana"};
  config.methods = {"khaos-ridge", "no-such-method"};
  config.nsr_levels = {0.0};
  config.replicates = 1;
  config.n_train = 60;
  config.n_test = 40;
  config.crps_samples = 50;
  config.sampler.n_iter = 300;
  config.sampler.n_burn = 100;
  config.sampler.n_thin = 4;
  config.ridge_prior.d_max = 4;
  const BenchOutput out = run_benchmark(config);
  REQUIRE(out.results.size() == 2);
  CHECK_FALSE(out.results[0].failed);
  CHECK(out.results[1].failed);
  CHECK_FALSE(out.results[1].error.empty());
}
