// Command-line driver: fit / predict / sobol / bench.
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "khaos/archive.hpp"
#include "khaos/benchmark.hpp"
#include "khaos/csv.hpp"
#include "khaos/errors.hpp"
#include "khaos/ordinal.hpp"
#include "khaos/sampler.hpp"
#include "khaos/sobol.hpp"
#include "khaos/sparse_pce.hpp"
#include "khaos/stats.hpp"

namespace {

using khaos::CsvTable;

struct Dataset {
  std::vector<std::string> covariate_names;
  std::string response_name;
  Eigen::MatrixXd x_raw;
  Eigen::VectorXd y;
};

Dataset load_dataset(const std::string& path, std::string response) {
  const CsvTable table = khaos::read_csv_file(path);
  if (table.nrow() == 0) throw std::invalid_argument("empty data file");
  if (response.empty()) response = table.header.back();
  const int y_col = table.column_index(response);
  if (y_col < 0)
    throw std::invalid_argument("response column '" + response +
                                "' not found");
  Dataset ds;
  ds.response_name = response;
  std::vector<int> x_cols;
  for (int j = 0; j < table.ncol(); ++j) {
    if (j == y_col) continue;
    x_cols.push_back(j);
    ds.covariate_names.push_back(table.header[static_cast<std::size_t>(j)]);
  }
  if (x_cols.empty()) throw std::invalid_argument("no covariate columns");
  ds.x_raw = khaos::numeric_columns(table, x_cols);
  ds.y = khaos::numeric_columns(table, {y_col}).col(0);
  return ds;
}

khaos::InputScaling make_scaling(const Dataset& ds) {
  khaos::InputScaling scaling;
  scaling.columns = ds.covariate_names;
  scaling.response = ds.response_name;
  scaling.min = ds.x_raw.colwise().minCoeff();
  scaling.max = ds.x_raw.colwise().maxCoeff();
  for (Eigen::Index j = 0; j < scaling.min.size(); ++j) {
    if (!(scaling.max[j] > scaling.min[j]))
      throw std::invalid_argument(
          "covariate column '" + ds.covariate_names[static_cast<std::size_t>(j)] +
          "' is constant; cannot rescale");
  }
  return scaling;
}

std::vector<double> parse_quantiles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double q = std::stod(item);
    if (!(q > 0.0 && q < 1.0))
      throw std::invalid_argument("quantile levels must be in (0,1)");
    out.push_back(q);
  }
  if (out.empty()) throw std::invalid_argument("no quantile levels given");
  return out;
}

std::string subset_label(const std::vector<int>& u,
                         const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i > 0) out += ":";
    out += names[static_cast<std::size_t>(u[i])];
  }
  return out;
}

void write_fit_summary(const std::string& path,
                       const khaos::ModelArchive& archive) {
  std::ofstream os(path);
  if (!os) throw std::invalid_argument("cannot write summary: " + path);
  os << "method: " << archive.method << "\n";
  os << "seed: " << archive.seed << "\n";
  os << "config_hash: " << archive.config_hash << "\n";
  const khaos::PosteriorDraws* draws = nullptr;
  if (archive.draws) draws = &*archive.draws;
  if (archive.ordinal) draws = &archive.ordinal->draws;
  if (draws) {
    os << "draws: " << draws->draws.size() << "\n";
    std::vector<double> m_sizes, sigmas;
    for (const auto& d : draws->draws) {
      m_sizes.push_back(static_cast<double>(d.terms.size()));
      sigmas.push_back(d.sigma2);
    }
    const auto m_stats = khaos::mean_var(m_sizes);
    const auto s_stats = khaos::mean_var(sigmas);
    std::sort(m_sizes.begin(), m_sizes.end());
    std::sort(sigmas.begin(), sigmas.end());
    os << "model size M: mean " << m_stats.mean << ", median "
       << khaos::sorted_quantile(m_sizes, 0.5) << ", min " << m_sizes.front()
       << ", max " << m_sizes.back() << "\n";
    os << "sigma2: mean " << s_stats.mean << ", 5% "
       << khaos::sorted_quantile(sigmas, 0.05) << ", 95% "
       << khaos::sorted_quantile(sigmas, 0.95) << "\n";
    const auto& st = draws->stats;
    os << "acceptance rates: birth " << st.birth.rate() << " (" << st.birth.proposed
       << " proposed), death " << st.death.rate() << ", mutate-degree "
       << st.mutate_degree.rate() << ", mutate-variable "
       << st.mutate_variable.rate() << ", g0 " << st.g0.rate() << "\n";
  }
  if (archive.sparse) {
    const auto& fit = *archive.sparse;
    os << "selected terms: " << fit.selected.size() << "\n";
    os << "criterion score: " << fit.score << "\n";
    os << "sigma2_hat: " << fit.sigma2_hat << "\n";
    os << "enrichment stages:";
    for (const auto& [d, q] : fit.enrichment_history)
      os << " (d=" << d << ",q=" << q << ")";
    os << "\n";
  }
}

int cmd_fit(const std::string& data_path, const std::string& out_path,
            const std::string& method, const std::string& response,
            khaos::PriorSpec prior, khaos::SamplerConfig config,
            int sparse_d0, int sparse_q0) {
  const Dataset ds = load_dataset(data_path, response);
  const khaos::InputScaling scaling = make_scaling(ds);
  long clamped = 0;
  const Eigen::MatrixXd x01 = scaling.apply(ds.x_raw, &clamped);

  khaos::ModelArchive archive;
  archive.method = method;
  archive.scaling = scaling;
  archive.seed = config.seed;

  if (method == "khaos-ridge" || method == "khaos-gprior") {
    prior.family = (method == "khaos-ridge")
                       ? khaos::PriorFamily::kRidge
                       : khaos::PriorFamily::kModifiedGPrior;
    archive.draws = khaos::run_chain(x01, ds.y, prior, config);
    archive.config_hash = archive.draws->config_hash;
  } else if (method == "sparse-pce") {
    khaos::SparseOptions opts;
    opts.prior = prior;
    opts.initial_d_max = sparse_d0;
    opts.initial_q_max = sparse_q0;
    archive.sparse = khaos::fit_sparse(x01, ds.y, opts);
    archive.config_hash = khaos::config_hash(prior, config);
  } else if (method == "ordinal") {
    std::vector<int> labels(static_cast<std::size_t>(ds.y.size()));
    for (Eigen::Index i = 0; i < ds.y.size(); ++i) {
      const double v = ds.y[i];
      if (std::abs(v - std::round(v)) > 1e-9)
        throw std::invalid_argument(
            "ordinal method requires integer response labels");
      labels[static_cast<std::size_t>(i)] = static_cast<int>(std::round(v));
    }
    archive.ordinal = khaos::fit_ordinal(x01, labels, prior, config);
    archive.config_hash = archive.ordinal->draws.config_hash;
  } else {
    throw std::invalid_argument("unknown method: " + method);
  }

  khaos::save_archive(out_path, archive);
  write_fit_summary(out_path + ".summary.txt", archive);
  std::cout << "wrote " << out_path << " (" << method << ", seed "
            << archive.seed << ", config hash " << archive.config_hash
            << ")\n";
  return 0;
}

Eigen::MatrixXd scaled_new_inputs(const khaos::ModelArchive& archive,
                                  const CsvTable& table, long* clamped) {
  std::vector<int> cols;
  std::vector<std::string> missing;
  for (const auto& name : archive.scaling.columns) {
    const int j = table.column_index(name);
    if (j < 0) {
      missing.push_back(name);
    } else {
      cols.push_back(j);
    }
  }
  std::vector<std::string> extra;
  for (const auto& name : table.header) {
    if (name == archive.scaling.response) continue;
    if (std::find(archive.scaling.columns.begin(),
                  archive.scaling.columns.end(),
                  name) == archive.scaling.columns.end())
      extra.push_back(name);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "schema mismatch;";
    if (!missing.empty()) {
      msg += " missing columns:";
      for (const auto& m : missing) msg += " " + m;
    }
    if (!extra.empty()) {
      msg += " unexpected columns:";
      for (const auto& e : extra) msg += " " + e;
    }
    throw std::invalid_argument(msg);
  }
  const Eigen::MatrixXd raw = khaos::numeric_columns(table, cols);
  return archive.scaling.apply(raw, clamped);
}

int cmd_predict(const std::string& archive_path, const std::string& data_path,
                const std::string& out_path, const std::string& quantile_spec,
                std::uint64_t seed) {
  const khaos::ModelArchive archive = khaos::load_archive(archive_path);
  const CsvTable table = khaos::read_csv_file(data_path);
  long clamped = 0;
  const Eigen::MatrixXd x01 = scaled_new_inputs(archive, table, &clamped);
  const std::vector<double> probs = parse_quantiles(quantile_spec);

  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw std::invalid_argument("cannot write " + out_path);
  os << "# khaos predictions; config_hash=" << archive.config_hash
     << " seed=" << archive.seed << " clamped_inputs=" << clamped << "\n";

  if (archive.ordinal) {
    const Eigen::MatrixXd probs_mat =
        khaos::predict_ordinal(*archive.ordinal, x01);
    std::vector<std::string> header;
    for (int k = 1; k <= archive.ordinal->num_categories; ++k)
      header.push_back("p_cat" + std::to_string(k));
    khaos::write_csv_row(os, header);
    for (Eigen::Index i = 0; i < probs_mat.rows(); ++i) {
      std::vector<std::string> row;
      for (Eigen::Index k = 0; k < probs_mat.cols(); ++k)
        row.push_back(khaos::format_double(probs_mat(i, k)));
      khaos::write_csv_row(os, row);
    }
    (void)seed;
    return 0;
  }

  std::vector<std::string> header{"mean", "sd"};
  for (double q : probs) header.push_back("q" + khaos::format_double(q));
  khaos::write_csv_row(os, header);

  if (archive.draws) {
    const khaos::PredictionSummary summary =
        khaos::predict(*archive.draws, x01, probs, /*include_noise=*/true);
    for (Eigen::Index i = 0; i < summary.mean.size(); ++i) {
      std::vector<std::string> row{khaos::format_double(summary.mean[i]),
                                   khaos::format_double(summary.sd[i])};
      for (Eigen::Index k = 0; k < summary.quantiles.cols(); ++k)
        row.push_back(khaos::format_double(summary.quantiles(i, k)));
      khaos::write_csv_row(os, row);
    }
  } else if (archive.sparse) {
    const khaos::SparsePrediction pred =
        khaos::sparse_predict(*archive.sparse, x01);
    for (Eigen::Index i = 0; i < pred.mean.size(); ++i) {
      std::vector<std::string> row{khaos::format_double(pred.mean[i]),
                                   khaos::format_double(pred.sd[i])};
      for (double q : probs) {
        row.push_back(khaos::format_double(
            pred.mean[i] + pred.sd[i] * khaos::normal_quantile(q)));
      }
      khaos::write_csv_row(os, row);
    }
  } else {
    throw std::invalid_argument("archive holds no model payload");
  }
  return 0;
}

int cmd_sobol(const std::string& archive_path, const std::string& out_path,
              int max_partial_rows) {
  const khaos::ModelArchive archive = khaos::load_archive(archive_path);
  khaos::SobolSummary summary;
  if (archive.draws) {
    summary = khaos::sobol_posterior(*archive.draws);
  } else if (archive.ordinal) {
    summary = khaos::sobol_posterior(archive.ordinal->draws);
  } else if (archive.sparse) {
    std::vector<khaos::CoefficientSample> samples(1);
    samples[0].terms = archive.sparse->selected;
    samples[0].beta = archive.sparse->beta_hat;
    samples[0].sigma2 = archive.sparse->sigma2_hat;
    summary = khaos::sobol_from_samples(samples, archive.sparse->p);
  } else {
    throw std::invalid_argument("archive holds no model payload");
  }

  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw std::invalid_argument("cannot write " + out_path);
  os << "# khaos sobol indices; config_hash=" << archive.config_hash
     << " seed=" << archive.seed << "\n";
  khaos::write_csv_row(os, {"type", "subset", "mean", "q05", "q95"});
  const auto& names = archive.scaling.columns;
  for (int i = 0; i < summary.p; ++i) {
    const auto& t = summary.total[static_cast<std::size_t>(i)];
    khaos::write_csv_row(
        os, {"total", names[static_cast<std::size_t>(i)],
             khaos::format_double(t.mean), khaos::format_double(t.q05),
             khaos::format_double(t.q95)});
  }
  // Partial indices, largest posterior means first.
  std::vector<std::pair<double, const std::vector<int>*>> order;
  for (const auto& [u, s] : summary.partial) order.emplace_back(s.mean, &u);
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  int written = 0;
  for (const auto& [mean, u] : order) {
    if (written++ >= max_partial_rows) break;
    const auto& s = summary.partial.at(*u);
    khaos::write_csv_row(os, {"partial", subset_label(*u, names),
                              khaos::format_double(s.mean),
                              khaos::format_double(s.q05),
                              khaos::format_double(s.q95)});
  }
  khaos::write_csv_row(
      os, {"noise", "epsilon", khaos::format_double(summary.noise_share.mean),
           khaos::format_double(summary.noise_share.q05),
           khaos::format_double(summary.noise_share.q95)});
  return 0;
}

int cmd_bench(khaos::BenchConfig config, const std::string& out_dir) {
  const khaos::BenchOutput out = khaos::run_benchmark(config);
  {
    std::ofstream os(out_dir + "/results.csv", std::ios::binary);
    if (!os) throw std::invalid_argument("cannot write results.csv");
    khaos::write_results_csv(os, out, config);
  }
  {
    std::ofstream os(out_dir + "/ranks.csv", std::ios::binary);
    if (!os) throw std::invalid_argument("cannot write ranks.csv");
    khaos::write_ranks_csv(os, out, config);
  }
  std::cout << "wrote " << out_dir << "/results.csv and " << out_dir
            << "/ranks.csv (" << out.results.size() << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive Bayesian polynomial chaos expansions"};
  app.require_subcommand(1);

  // fit ----------------------------------------------------------------
  std::string data_path, out_path = "model.json", method = "khaos-gprior";
  std::string response;
  khaos::PriorSpec prior;
  khaos::SamplerConfig config;
  std::string prior_name = "modified-gprior";
  int sparse_d0 = 2, sparse_q0 = 2;

  CLI::App* fit = app.add_subcommand("fit", "fit a model to a CSV dataset");
  fit->add_option("data", data_path, "training CSV (header row)")->required();
  fit->add_option("--out", out_path, "output archive path");
  fit->add_option("--method", method,
                  "khaos-ridge | khaos-gprior | sparse-pce | ordinal");
  fit->add_option("--response", response, "response column (default: last)");
  fit->add_option("--iters", config.n_iter, "MCMC iterations");
  fit->add_option("--burn", config.n_burn, "burn-in iterations");
  fit->add_option("--thin", config.n_thin, "thinning interval");
  fit->add_option("--seed", config.seed, "RNG seed");
  fit->add_option("--prior", prior_name, "ridge | gprior | modified-gprior");
  fit->add_option("--zeta", prior.zeta, "complexity penalty exponent");
  fit->add_option("--dmax", prior.d_max, "maximum total degree");
  fit->add_option("--qmax", prior.q_max, "maximum interaction order");
  fit->add_option("--tau2", prior.tau2, "ridge scale");
  fit->add_option("--mmax", config.m_max, "maximum number of terms");
  fit->add_flag("--exact-sigma", prior.exact_sigma_conditional,
                "use the exact sigma^2 full conditional");
  fit->add_option("--sparse-d0", sparse_d0, "sparse-pce initial degree limit");
  fit->add_option("--sparse-q0", sparse_q0, "sparse-pce initial order limit");

  // predict -------------------------------------------------------------
  std::string archive_path, newdata_path, pred_out = "predictions.csv";
  std::string quantiles = "0.05,0.5,0.95";
  std::uint64_t pred_seed = 0;
  CLI::App* predict =
      app.add_subcommand("predict", "predict at new inputs from an archive");
  predict->add_option("archive", archive_path, "model archive")->required();
  predict->add_option("newdata", newdata_path, "CSV of new inputs")->required();
  predict->add_option("--out", pred_out, "output CSV");
  predict->add_option("--quantiles", quantiles, "comma-separated levels");
  predict->add_option("--seed", pred_seed, "(reserved)");

  // sobol ---------------------------------------------------------------
  std::string sobol_archive, sobol_out = "sobol.csv";
  int max_partial = 25;
  CLI::App* sobol =
      app.add_subcommand("sobol", "Sobol sensitivity indices from an archive");
  sobol->add_option("archive", sobol_archive, "model archive")->required();
  sobol->add_option("--out", sobol_out, "output CSV");
  sobol->add_option("--max-partial", max_partial, "partial index row cap");

  // bench ---------------------------------------------------------------
  khaos::BenchConfig bench_config;
  std::string out_dir = ".";
  std::string functions_csv, methods_csv, nsr_csv;
  CLI::App* bench = app.add_subcommand("bench", "run the simulation study");
  bench->add_option("--out-dir", out_dir, "output directory");
  bench->add_option("--functions", functions_csv, "comma-separated functions");
  bench->add_option("--methods", methods_csv, "comma-separated methods");
  bench->add_option("--nsr", nsr_csv, "comma-separated NSR levels");
  bench->add_option("--replicates", bench_config.replicates, "replicates");
  bench->add_option("--n-train", bench_config.n_train, "training points");
  bench->add_option("--n-test", bench_config.n_test, "test points");
  bench->add_option("--seed", bench_config.seed, "RNG seed");
  bench->add_option("--iters", bench_config.sampler.n_iter, "MCMC iterations");
  bench->add_option("--burn", bench_config.sampler.n_burn, "burn-in");
  bench->add_option("--thin", bench_config.sampler.n_thin, "thinning");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*fit) {
      prior.family = khaos::prior_family_from_string(prior_name);
      return cmd_fit(data_path, out_path, method, response, prior, config,
                     sparse_d0, sparse_q0);
    }
    if (*predict)
      return cmd_predict(archive_path, newdata_path, pred_out, quantiles,
                         pred_seed);
    if (*sobol) return cmd_sobol(sobol_archive, sobol_out, max_partial);
    if (*bench) {
      auto split = [](const std::string& text) {
        std::vector<std::string> out;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(item);
        return out;
      };
      if (!functions_csv.empty()) bench_config.functions = split(functions_csv);
      if (!methods_csv.empty()) bench_config.methods = split(methods_csv);
      if (!nsr_csv.empty()) {
        bench_config.nsr_levels.clear();
        for (const auto& s : split(nsr_csv))
          bench_config.nsr_levels.push_back(std::stod(s));
      }
      return cmd_bench(bench_config, out_dir);
    }
  } catch (const khaos::NumericalRankError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const khaos::ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const khaos::CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
