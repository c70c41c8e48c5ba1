#include "khaos/benchmark.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "khaos/crps.hpp"
#include "khaos/csv.hpp"
#include "khaos/lhs.hpp"
#include "khaos/test_functions.hpp"

namespace khaos {

BenchConfig::BenchConfig() {
  ridge_prior.family = PriorFamily::kRidge;
  gprior_prior.family = PriorFamily::kModifiedGPrior;
  // Noise-free chains converge slowly (each accepted term tightens sigma^2
  // and unlocks the next), so the study runs long chains by default.
  sampler.n_iter = 40000;
  sampler.n_burn = 20000;
  sampler.n_thin = 20;
  crps_samples = 1000;
}

namespace {

std::uint64_t cell_seed(std::uint64_t seed, std::size_t fn_idx,
                        std::size_t nsr_idx, int replicate,
                        std::size_t method_idx) {
  const std::array<std::uint64_t, 4> path{
      static_cast<std::uint64_t>(fn_idx), static_cast<std::uint64_t>(nsr_idx),
      static_cast<std::uint64_t>(replicate),
      static_cast<std::uint64_t>(method_idx)};
  return Rng::derive_seed(seed, path);
}

struct CellData {
  Eigen::MatrixXd x_train, x_test;
  Eigen::VectorXd y_train, y_test;
};

CellData make_cell_data(const TestFunction& fn, double nsr, double var_f,
                        int n_train, int n_test, std::uint64_t data_seed) {
  Rng rng(data_seed);
  CellData cell;
  cell.x_train = maximin_lhs(n_train, fn.p, rng);
  cell.x_test = maximin_lhs(n_test, fn.p, rng);
  cell.y_train = fn.evaluate_rows(cell.x_train);
  cell.y_test = fn.evaluate_rows(cell.x_test);
  if (nsr > 0.0) {
    const double sd = std::sqrt(nsr * var_f);
    for (Eigen::Index i = 0; i < cell.y_train.size(); ++i)
      cell.y_train[i] += sd * rng.normal();
    for (Eigen::Index i = 0; i < cell.y_test.size(); ++i)
      cell.y_test[i] += sd * rng.normal();
  }
  return cell;
}

double score_khaos(const BenchConfig& config, const PriorSpec& prior,
                   const CellData& cell, double nsr, std::uint64_t seed) {
  SamplerConfig sc = config.sampler;
  sc.seed = seed;
  const PosteriorDraws draws =
      run_chain(cell.x_train, cell.y_train, prior, sc);
  Rng rng(Rng::derive_seed(seed, std::array<std::uint64_t, 1>{0x9c07eull}));
  const bool include_noise = nsr > 0.0;
  const Eigen::MatrixXd samples =
      predictive_samples(draws, cell.x_test, include_noise, rng);
  return mean_crps(samples, cell.y_test);
}

double score_sparse(const BenchConfig& config, const CellData& cell,
                    double nsr, std::uint64_t seed) {
  const SparseFit fit = fit_sparse(cell.x_train, cell.y_train, config.sparse);
  Rng rng(Rng::derive_seed(seed, std::array<std::uint64_t, 1>{0x5c07eull}));
  const bool include_noise = nsr > 0.0;
  const Eigen::MatrixXd samples = sparse_predictive_samples(
      fit, cell.x_test, config.crps_samples, include_noise, rng);
  return mean_crps(samples, cell.y_test);
}

}  // namespace

BenchOutput run_benchmark(const BenchConfig& config) {
  if (config.methods.empty())
    throw std::invalid_argument("run_benchmark: no methods");
  BenchOutput out;

  for (std::size_t fi = 0; fi < config.functions.size(); ++fi) {
    const TestFunction& fn = test_function(config.functions[fi]);
    const double var_f = function_variance(fn);

    for (std::size_t ni = 0; ni < config.nsr_levels.size(); ++ni) {
      const double nsr = config.nsr_levels[ni];

      for (int rep = 0; rep < config.replicates; ++rep) {
        // The data stream is shared by every method (paired comparison).
        const std::uint64_t data_seed =
            cell_seed(config.seed, fi, ni, rep, 0xdadaull);
        const CellData cell = make_cell_data(fn, nsr, var_f, config.n_train,
                                             config.n_test, data_seed);

        std::vector<BenchResult> group;
        for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
          const std::string& method = config.methods[mi];
          BenchResult row;
          row.method = method;
          row.function = fn.name;
          row.replicate = rep;
          row.nsr = nsr;
          const std::uint64_t ms = cell_seed(config.seed, fi, ni, rep, mi);
          const auto start = std::chrono::steady_clock::now();
          try {
            if (method == "khaos-ridge") {
              row.avg_crps =
                  score_khaos(config, config.ridge_prior, cell, nsr, ms);
            } else if (method == "khaos-gprior") {
              row.avg_crps =
                  score_khaos(config, config.gprior_prior, cell, nsr, ms);
            } else if (method == "sparse-pce") {
              row.avg_crps = score_sparse(config, cell, nsr, ms);
            } else {
              throw std::invalid_argument("unknown method: " + method);
            }
          } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
          }
          row.wall_seconds =
              std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            start)
                  .count();
          group.push_back(std::move(row));
        }

        // Within-1% flags per (function, NSR, replicate) group.
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : group) {
          if (!r.failed) best = std::min(best, r.avg_crps);
        }
        for (auto& r : group) {
          r.within_one_percent = !r.failed && r.avg_crps <= 1.01 * best;
          out.results.push_back(std::move(r));
        }
      }
    }
  }

  // Average ranks per function x NSR (ties share the mean rank).
  std::map<std::pair<std::string, double>,
           std::map<std::string, std::pair<double, int>>>
      rank_acc;
  for (std::size_t fi = 0; fi < config.functions.size(); ++fi) {
    for (double nsr : config.nsr_levels) {
      for (int rep = 0; rep < config.replicates; ++rep) {
        std::vector<const BenchResult*> group;
        for (const auto& r : out.results) {
          if (r.function == config.functions[fi] && r.nsr == nsr &&
              r.replicate == rep && !r.failed)
            group.push_back(&r);
        }
        for (const auto* r : group) {
          double rank = 1.0;
          int ties = 0;
          for (const auto* other : group) {
            if (other == r) continue;
            if (other->avg_crps < r->avg_crps) rank += 1.0;
            if (other->avg_crps == r->avg_crps) ++ties;
          }
          rank += 0.5 * ties;  // ties share the mean rank
          auto& acc = rank_acc[{r->function, nsr}][r->method];
          acc.first += rank;
          acc.second += 1;
        }
      }
    }
  }
  for (const auto& [key, methods] : rank_acc) {
    for (const auto& [method, acc] : methods) {
      RankRow row;
      row.function = key.first;
      row.nsr = key.second;
      row.method = method;
      row.avg_rank = acc.first / acc.second;
      out.ranks.push_back(std::move(row));
    }
  }
  return out;
}

std::uint64_t bench_config_hash(const BenchConfig& config) {
  std::uint64_t h = config_hash(config.gprior_prior, config.sampler);
  h ^= config_hash(config.ridge_prior, config.sampler) * 0x9e3779b97f4a7c15ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  for (const auto& m : config.methods)
    for (char c : m) mix(static_cast<unsigned char>(c));
  for (const auto& f : config.functions)
    for (char c : f) mix(static_cast<unsigned char>(c));
  for (double nsr : config.nsr_levels) {
    std::uint64_t bits;
    std::memcpy(&bits, &nsr, sizeof(bits));
    mix(bits);
  }
  mix(static_cast<std::uint64_t>(config.n_train));
  mix(static_cast<std::uint64_t>(config.n_test));
  mix(static_cast<std::uint64_t>(config.replicates));
  mix(static_cast<std::uint64_t>(config.crps_samples));
  mix(config.seed);
  return h;
}

void write_results_csv(std::ostream& os, const BenchOutput& out,
                       const BenchConfig& config) {
  os << "# khaos benchmark results; seed=" << config.seed
     << " config_hash=" << bench_config_hash(config) << "\n";
  write_csv_row(os, {"method", "function", "replicate", "nsr", "avg_crps",
                     "wall_seconds", "within_1pct", "failed", "error"});
  for (const auto& r : out.results) {
    write_csv_row(os, {r.method, r.function, std::to_string(r.replicate),
                       format_double(r.nsr), format_double(r.avg_crps),
                       format_double(r.wall_seconds),
                       r.within_one_percent ? "1" : "0", r.failed ? "1" : "0",
                       r.error});
  }
}

void write_ranks_csv(std::ostream& os, const BenchOutput& out,
                     const BenchConfig& config) {
  os << "# khaos benchmark ranks; seed=" << config.seed
     << " config_hash=" << bench_config_hash(config) << "\n";
  write_csv_row(os, {"function", "nsr", "method", "avg_rank"});
  for (const auto& r : out.ranks) {
    write_csv_row(os, {r.function, format_double(r.nsr), r.method,
                       format_double(r.avg_rank)});
  }
}

}  // namespace khaos
