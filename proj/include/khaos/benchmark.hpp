#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "khaos/prior.hpp"
#include "khaos/sampler.hpp"
#include "khaos/sparse_pce.hpp"

namespace khaos {

/// One scored benchmark cell.
struct BenchResult {
  std::string method;
  std::string function;
  int replicate = 0;
  double nsr = 0.0;
  double avg_crps = 0.0;
  double wall_seconds = 0.0;
  bool within_one_percent = false;
  bool failed = false;
  std::string error;
};

struct BenchConfig {
  std::vector<std::string> methods{"khaos-ridge", "khaos-gprior", "sparse-pce"};
  std::vector<std::string> functions{"banana", "ishigami", "rabbits",
                                     "pollutant_uni", "friedman20"};
  std::vector<double> nsr_levels{0.0, 0.5};
  int n_train = 1000;
  int n_test = 1000;
  int replicates = 10;
  std::uint64_t seed = 17;
  /// Predictive sample count used for CRPS scoring.
  int crps_samples = 500;
  /// Overrides applied to every method's sampler (iterations etc.).
  SamplerConfig sampler;
  PriorSpec ridge_prior;   // family forced to ridge
  PriorSpec gprior_prior;  // family forced to modified-gprior
  SparseOptions sparse;

  BenchConfig();
};

/// Average rank of each method on one function x NSR cell (ties share the
/// mean rank).
struct RankRow {
  std::string function;
  double nsr = 0.0;
  std::string method;
  double avg_rank = 0.0;
};

struct BenchOutput {
  std::vector<BenchResult> results;
  std::vector<RankRow> ranks;
};

/// Run the simulation study: per replicate a fresh maximin train/test design
/// pair shared by all methods, noise with sd = sqrt(NSR * Var_f), CRPS on
/// the test set. Method failures are recorded and the run continues.
/// Deterministic for a fixed seed: every cell derives its own stream from
/// (seed, function, NSR, replicate, method).
BenchOutput run_benchmark(const BenchConfig& config);

/// Digest of the full study configuration, embedded in the output headers.
std::uint64_t bench_config_hash(const BenchConfig& config);

/// CSV emission (RFC 4180 quoting, one '#' metadata line carrying the seed
/// and config hash).
void write_results_csv(std::ostream& os, const BenchOutput& out,
                       const BenchConfig& config);
void write_ranks_csv(std::ostream& os, const BenchOutput& out,
                     const BenchConfig& config);

}  // namespace khaos
