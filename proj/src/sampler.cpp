#include "khaos/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "khaos/candidate_space.hpp"
#include "khaos/errors.hpp"
#include "khaos/stats.hpp"

namespace khaos {

void SamplerConfig::validate() const {
  if (n_iter < 1) throw std::invalid_argument("SamplerConfig: n_iter < 1");
  if (n_burn < 0 || n_burn >= n_iter)
    throw std::invalid_argument("SamplerConfig: need 0 <= n_burn < n_iter");
  if (n_thin < 1) throw std::invalid_argument("SamplerConfig: n_thin < 1");
  if (!(p_birth > 0.0) || !(p_death > 0.0) || !(p_birth + p_death < 1.0))
    throw std::invalid_argument("SamplerConfig: need P_B,P_D > 0, P_B+P_D < 1");
  if (m_max < 1) throw std::invalid_argument("SamplerConfig: m_max < 1");
  if (delayed_rejection_cap < 1)
    throw std::invalid_argument("SamplerConfig: delayed_rejection_cap < 1");
  if (adapt_interval < 1)
    throw std::invalid_argument("SamplerConfig: adapt_interval < 1");
}

std::array<double, 2> adapt_mutation_weights(const MoveCounters& degree,
                                             const MoveCounters& variable) {
  const double r1 = degree.proposed > 0
                        ? static_cast<double>(degree.accepted) / degree.proposed
                        : 0.0;
  const double r2 =
      variable.proposed > 0
          ? static_cast<double>(variable.accepted) / variable.proposed
          : 0.0;
  double w1 = (r1 + r2 > 0.0) ? r1 / (r1 + r2) : 0.5;
  w1 = std::min(0.90, std::max(0.10, w1));
  return {w1, 1.0 - w1};
}

Sampler::Sampler(Eigen::MatrixXd X, Eigen::VectorXd y, PriorSpec prior,
                 SamplerConfig config)
    : x_(std::move(X)),
      y_(std::move(y)),
      prior_(std::move(prior)),
      config_(config),
      rng_(config.seed),
      table_(x_, std::min(prior_.d_max, kMaxLegendreDegree)) {
  n_ = static_cast<int>(x_.rows());
  p_ = static_cast<int>(x_.cols());
  if (n_ < 2) throw std::domain_error("Sampler: need at least two rows");
  if (y_.size() != n_)
    throw std::domain_error("Sampler: response length does not match X");
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < p_; ++j) {
      if (!(x_(i, j) >= 0.0 && x_(i, j) <= 1.0))
        throw std::domain_error("Sampler: X must lie in [0,1]");
    }
  }
  prior_.validate();
  config_.validate();
  // The admissible space cannot ask for more interacting variables than
  // exist; clamp rather than error so one default works across datasets.
  prior_.q_max = std::min({prior_.q_max, p_, prior_.d_max});

  const CandidateSpace space(p_, prior_.d_max, prior_.q_max);
  log_card_ = log_cardinality(space);

  const int cap = config_.m_max + 1;
  cols_.resize(n_, cap);
  gram_.setZero(cap, cap);
  psi_t_y_.setZero(cap);
  scratch_col_.resize(n_);

  cols_.col(0).setOnes();
  gram_(0, 0) = static_cast<double>(n_);
  psi_t_y_[0] = y_.sum();
  yty_ = y_.squaredNorm();

  state_.inclusion_counts.assign(static_cast<std::size_t>(p_), 0);
  state_.lambda = prior_.a_M / prior_.b_M;
  state_.g0sq = prior_.b_g / prior_.a_g;
  if (prior_.fixed_sigma2) {
    state_.sigma2 = *prior_.fixed_sigma2;
  } else {
    const double mean = y_.mean();
    double var = (y_.array() - mean).square().sum() / std::max(1, n_ - 1);
    state_.sigma2 = std::max(var, 1e-12);
  }
  state_.mutate_weights = (p_ <= 3) ? std::array<double, 2>{1.0, 0.0}
                                    : std::array<double, 2>{0.5, 0.5};
  refresh_conditional();
  state_.beta = cp_.mu;
}

GaussianLinearStats Sampler::active_stats() const {
  GaussianLinearStats s;
  const int k = m1();
  s.gram = gram_.topLeftCorner(k, k);
  s.psi_t_y = psi_t_y_.head(k);
  s.yty = yty_;
  s.n = n_;
  return s;
}

Eigen::VectorXd Sampler::g_full() const {
  Eigen::VectorXd g(m1());
  g[0] = 1.0;
  const double zeta = prior_.effective_zeta();
  for (std::size_t i = 0; i < state_.terms.size(); ++i)
    g[static_cast<Eigen::Index>(i) + 1] = shrink_weight(state_.terms[i], zeta);
  return g;
}

void Sampler::refresh_conditional() {
  std::vector<MultiIndex> full;
  full.reserve(state_.terms.size() + 1);
  full.push_back(MultiIndex::intercept(p_));
  full.insert(full.end(), state_.terms.begin(), state_.terms.end());
  cp_ = conditional_posterior(active_stats(),
                              prior_cov_inverse(full, prior_, state_.g0sq),
                              prior_);
}

bool Sampler::evaluate_candidate(const GaussianLinearStats& stats,
                                 const std::vector<MultiIndex>& indices,
                                 ConditionalPosterior* out) const {
  try {
    *out = conditional_posterior(
        stats, prior_cov_inverse(indices, prior_, state_.g0sq), prior_);
    return true;
  } catch (const NumericalRankError&) {
    return false;  // automatic rejection
  }
}

namespace {

std::vector<MultiIndex> with_intercept(const std::vector<MultiIndex>& terms,
                                       int p) {
  std::vector<MultiIndex> full;
  full.reserve(terms.size() + 1);
  full.push_back(MultiIndex::intercept(p));
  full.insert(full.end(), terms.begin(), terms.end());
  return full;
}

}  // namespace

void Sampler::birth_move() {
  stats_.birth.proposed++;
  const int m = static_cast<int>(state_.terms.size());
  if (m >= config_.m_max) return;

  const proposal::BirthDraw draw = proposal::draw_birth_candidate(
      state_.inclusion_counts, prior_, p_, config_.delayed_rejection_cap, rng_);
  if (!draw.alpha) {
    stats_.birth.abandoned++;
    return;
  }
  const MultiIndex& alpha = *draw.alpha;
  for (const auto& t : state_.terms) {
    if (t == alpha) {
      stats_.birth.abandoned++;
      return;
    }
  }

  const int k = m1();
  table_.column_into(alpha, scratch_col_);

  GaussianLinearStats cand;
  cand.gram.resize(k + 1, k + 1);
  cand.gram.topLeftCorner(k, k) = gram_.topLeftCorner(k, k);
  Eigen::VectorXd cross = cols_.leftCols(k).transpose() * scratch_col_;
  cand.gram.block(0, k, k, 1) = cross;
  cand.gram.block(k, 0, 1, k) = cross.transpose();
  cand.gram(k, k) = scratch_col_.squaredNorm();
  cand.psi_t_y.resize(k + 1);
  cand.psi_t_y.head(k) = psi_t_y_.head(k);
  cand.psi_t_y[k] = scratch_col_.dot(y_);
  cand.yty = yty_;
  cand.n = n_;

  auto cand_terms = state_.terms;
  cand_terms.push_back(alpha);
  ConditionalPosterior cand_cp;
  if (!evaluate_candidate(cand, with_intercept(cand_terms, p_), &cand_cp))
    return;

  const double log_corr = proposal::log_birth_correction(
      alpha, state_.inclusion_counts, m, config_.p_birth, config_.p_death,
      prior_);
  const double log_prior_ratio = std::log(m + prior_.a_M) -
                                 std::log(m + 1.0) - std::log(prior_.b_M + 1.0) -
                                 log_card_;
  const double log_alpha =
      cand_cp.log_marginal - cp_.log_marginal + log_prior_ratio + log_corr;

  if (std::log(rng_.uniform_open()) < log_alpha) {
    cols_.col(k) = scratch_col_;
    gram_.topLeftCorner(k + 1, k + 1) = cand.gram;
    psi_t_y_.head(k + 1) = cand.psi_t_y;
    state_.terms.push_back(alpha);
    for (int j : alpha.active())
      state_.inclusion_counts[static_cast<std::size_t>(j)]++;
    cp_ = std::move(cand_cp);
    state_.beta = draw_beta(cp_, state_.sigma2, rng_);
    stats_.birth.accepted++;
    accepted_moves_++;
  }
}

void Sampler::death_move() {
  stats_.death.proposed++;
  const int m = static_cast<int>(state_.terms.size());
  if (m < 1) return;

  const int victim = rng_.uniform_int(0, m - 1);
  const int vcol = victim + 1;
  const int k = m1();

  GaussianLinearStats cand;
  cand.gram.resize(k - 1, k - 1);
  cand.psi_t_y.resize(k - 1);
  for (int i = 0, ii = 0; i < k; ++i) {
    if (i == vcol) continue;
    cand.psi_t_y[ii] = psi_t_y_[i];
    for (int j = 0, jj = 0; j < k; ++j) {
      if (j == vcol) continue;
      cand.gram(ii, jj) = gram_(i, j);
      ++jj;
    }
    ++ii;
  }
  cand.yty = yty_;
  cand.n = n_;

  auto cand_terms = state_.terms;
  const MultiIndex alpha = cand_terms[static_cast<std::size_t>(victim)];
  cand_terms.erase(cand_terms.begin() + victim);
  ConditionalPosterior cand_cp;
  if (!evaluate_candidate(cand, with_intercept(cand_terms, p_), &cand_cp))
    return;

  auto counts_after = state_.inclusion_counts;
  for (int j : alpha.active()) counts_after[static_cast<std::size_t>(j)]--;

  const double log_corr = proposal::log_death_correction(
      alpha, counts_after, m, config_.p_birth, config_.p_death, prior_);
  const double log_prior_ratio = std::log(static_cast<double>(m)) +
                                 std::log(prior_.b_M + 1.0) + log_card_ -
                                 std::log(m - 1.0 + prior_.a_M);
  const double log_alpha =
      cand_cp.log_marginal - cp_.log_marginal + log_prior_ratio + log_corr;

  if (std::log(rng_.uniform_open()) < log_alpha) {
    // Shift the stored columns left over the victim.
    for (int c = vcol; c < k - 1; ++c) cols_.col(c) = cols_.col(c + 1);
    gram_.topLeftCorner(k - 1, k - 1) = cand.gram;
    psi_t_y_.head(k - 1) = cand.psi_t_y;
    state_.terms.erase(state_.terms.begin() + victim);
    state_.inclusion_counts = std::move(counts_after);
    cp_ = std::move(cand_cp);
    state_.beta = draw_beta(cp_, state_.sigma2, rng_);
    stats_.death.accepted++;
    accepted_moves_++;
  }
}

namespace {

// Candidate stats with column `col` of the active model replaced.
GaussianLinearStats replace_column_stats(const Eigen::MatrixXd& cols,
                                         const Eigen::MatrixXd& gram,
                                         const Eigen::VectorXd& psi_t_y,
                                         double yty, int n, int k, int col,
                                         const Eigen::VectorXd& new_col,
                                         const Eigen::VectorXd& y) {
  GaussianLinearStats cand;
  cand.gram = gram.topLeftCorner(k, k);
  Eigen::VectorXd cross = cols.leftCols(k).transpose() * new_col;
  cross[col] = new_col.squaredNorm();
  cand.gram.row(col) = cross.transpose();
  cand.gram.col(col) = cross;
  cand.psi_t_y = psi_t_y.head(k);
  cand.psi_t_y[col] = new_col.dot(y);
  cand.yty = yty;
  cand.n = n;
  return cand;
}

}  // namespace

void Sampler::mutate_degree_move() {
  stats_.mutate_degree.proposed++;
  const int m = static_cast<int>(state_.terms.size());
  if (m < 1) return;

  const int t = rng_.uniform_int(0, m - 1);
  const MultiIndex& alpha = state_.terms[static_cast<std::size_t>(t)];
  const std::vector<int> active = alpha.active();
  const int q = alpha.order();
  const int d_curr = alpha.degree();

  std::vector<double> wd(static_cast<std::size_t>(prior_.d_max - q + 1));
  for (int d = q; d <= prior_.d_max; ++d)
    wd[static_cast<std::size_t>(d - q)] =
        std::pow(static_cast<double>(d), -prior_.s_d);
  const int d_cand = q + rng_.categorical(wd);
  const std::vector<int> parts = sample_composition(d_cand, q, rng_);

  std::vector<int> degrees(static_cast<std::size_t>(p_), 0);
  for (int i = 0; i < q; ++i)
    degrees[static_cast<std::size_t>(active[static_cast<std::size_t>(i)])] =
        parts[static_cast<std::size_t>(i)];
  const MultiIndex cand_alpha(degrees);

  for (const auto& other : state_.terms) {
    if (other == cand_alpha) {
      stats_.mutate_degree.abandoned++;
      return;
    }
  }

  const int k = m1();
  table_.column_into(cand_alpha, scratch_col_);
  GaussianLinearStats cand = replace_column_stats(
      cols_, gram_, psi_t_y_, yty_, n_, k, t + 1, scratch_col_, y_);

  auto cand_terms = state_.terms;
  cand_terms[static_cast<std::size_t>(t)] = cand_alpha;
  ConditionalPosterior cand_cp;
  if (!evaluate_candidate(cand, with_intercept(cand_terms, p_), &cand_cp))
    return;

  // Hastings factor for the degree resampling and uniform repartition.
  const double log_corr =
      prior_.s_d * (std::log(static_cast<double>(d_cand)) -
                    std::log(static_cast<double>(d_curr))) +
      log_count_compositions(d_cand, q) - log_count_compositions(d_curr, q);
  const double log_alpha =
      cand_cp.log_marginal - cp_.log_marginal + log_corr;

  if (std::log(rng_.uniform_open()) < log_alpha) {
    cols_.col(t + 1) = scratch_col_;
    gram_.topLeftCorner(k, k) = cand.gram;
    psi_t_y_.head(k) = cand.psi_t_y;
    state_.terms[static_cast<std::size_t>(t)] = cand_alpha;
    cp_ = std::move(cand_cp);
    state_.beta = draw_beta(cp_, state_.sigma2, rng_);
    stats_.mutate_degree.accepted++;
    accepted_moves_++;
  }
}

void Sampler::mutate_variable_move() {
  stats_.mutate_variable.proposed++;
  const int m = static_cast<int>(state_.terms.size());
  if (m < 1) return;

  const int t = rng_.uniform_int(0, m - 1);
  const MultiIndex& alpha = state_.terms[static_cast<std::size_t>(t)];
  const std::vector<int> active = alpha.active();
  const int q = alpha.order();
  if (q >= p_) {
    stats_.mutate_variable.abandoned++;
    return;
  }

  const int var_old =
      active[static_cast<std::size_t>(rng_.uniform_int(0, q - 1))];
  std::vector<int> inactive;
  std::vector<double> weights;
  inactive.reserve(static_cast<std::size_t>(p_ - q));
  for (int j = 0; j < p_; ++j) {
    if (alpha[j] == 0) {
      inactive.push_back(j);
      weights.push_back(
          state_.inclusion_counts[static_cast<std::size_t>(j)] +
          proposal::kEtaDelta);
    }
  }
  const int var_new =
      inactive[static_cast<std::size_t>(rng_.categorical(weights))];

  std::vector<int> degrees = alpha.degrees();
  degrees[static_cast<std::size_t>(var_new)] =
      degrees[static_cast<std::size_t>(var_old)];
  degrees[static_cast<std::size_t>(var_old)] = 0;
  const MultiIndex cand_alpha(degrees);

  for (std::size_t i = 0; i < state_.terms.size(); ++i) {
    if (static_cast<int>(i) != t && state_.terms[i] == cand_alpha) {
      stats_.mutate_variable.abandoned++;
      return;
    }
  }

  const proposal::SwapProbs probs = proposal::variable_swap_probs(
      alpha, var_old, var_new, state_.inclusion_counts);

  const int k = m1();
  table_.column_into(cand_alpha, scratch_col_);
  GaussianLinearStats cand = replace_column_stats(
      cols_, gram_, psi_t_y_, yty_, n_, k, t + 1, scratch_col_, y_);

  auto cand_terms = state_.terms;
  cand_terms[static_cast<std::size_t>(t)] = cand_alpha;
  ConditionalPosterior cand_cp;
  if (!evaluate_candidate(cand, with_intercept(cand_terms, p_), &cand_cp))
    return;

  const double log_alpha = cand_cp.log_marginal - cp_.log_marginal +
                           std::log(probs.reverse) - std::log(probs.forward);

  if (std::log(rng_.uniform_open()) < log_alpha) {
    cols_.col(t + 1) = scratch_col_;
    gram_.topLeftCorner(k, k) = cand.gram;
    psi_t_y_.head(k) = cand.psi_t_y;
    state_.terms[static_cast<std::size_t>(t)] = cand_alpha;
    state_.inclusion_counts[static_cast<std::size_t>(var_old)]--;
    state_.inclusion_counts[static_cast<std::size_t>(var_new)]++;
    cp_ = std::move(cand_cp);
    state_.beta = draw_beta(cp_, state_.sigma2, rng_);
    stats_.mutate_variable.accepted++;
    accepted_moves_++;
  }
}

void Sampler::gibbs_sweep() {
  const int k = m1();
  const PriorCovInverse pci =
      prior_cov_inverse(with_intercept(state_.terms, p_), prior_, state_.g0sq);
  const BetaSigmaDraw draw =
      gibbs_beta_sigma(cp_, cols_.leftCols(k), y_, state_.beta, prior_, pci,
                       gram_.topLeftCorner(k, k), rng_);
  state_.sigma2 = draw.sigma2;
  state_.beta = draw.beta;
  state_.lambda =
      gibbs_lambda(static_cast<int>(state_.terms.size()), prior_, rng_);
}

void Sampler::update_g0() {
  if (!prior_.has_g_structure()) return;
  stats_.g0.proposed++;
  const G0Update res =
      mh_update_g0(state_.g0sq, g_full(), active_stats(), prior_, rng_);
  if (res.accepted) {
    stats_.g0.accepted++;
    state_.g0sq = res.value;
    refresh_conditional();
  }
}

void Sampler::maybe_adapt() {
  if (p_ <= 3) return;  // variable mutation disabled, weights stay fixed
  if (iter_ >= config_.n_burn) return;
  if ((iter_ + 1) % config_.adapt_interval != 0) return;
  state_.mutate_weights =
      adapt_mutation_weights(stats_.mutate_degree, stats_.mutate_variable);
}

void Sampler::check_counts() const {
  std::vector<int> recount(static_cast<std::size_t>(p_), 0);
  for (const auto& t : state_.terms) {
    for (int j : t.active()) recount[static_cast<std::size_t>(j)]++;
  }
  if (recount != state_.inclusion_counts)
    throw std::logic_error("Sampler: inclusion count bookkeeping diverged");
}

void Sampler::step() {
  const double u = rng_.uniform();
  if (u < config_.p_birth) {
    birth_move();
  } else if (u < config_.p_birth + config_.p_death) {
    death_move();
  } else {
    const double v = rng_.uniform();
    if (v < state_.mutate_weights[0]) {
      mutate_degree_move();
    } else {
      mutate_variable_move();
    }
  }
  gibbs_sweep();
  update_g0();
  maybe_adapt();
  if (config_.check_invariants && accepted_moves_ > 0 &&
      accepted_moves_ % 100 == 0) {
    check_counts();
  }
  ++iter_;
}

Eigen::VectorXd Sampler::fitted() const {
  return cols_.leftCols(m1()) * state_.beta;
}

Draw Sampler::snapshot() const {
  Draw d;
  d.terms = state_.terms;
  d.beta = state_.beta;
  d.sigma2 = state_.sigma2;
  d.g0sq = state_.g0sq;
  d.lambda = state_.lambda;
  return d;
}

void Sampler::set_response(const Eigen::VectorXd& y) {
  if (y.size() != n_)
    throw std::invalid_argument("set_response: length mismatch");
  y_ = y;
  yty_ = y_.squaredNorm();
  psi_t_y_.head(m1()).noalias() = cols_.leftCols(m1()).transpose() * y_;
  refresh_conditional();
}

PosteriorDraws Sampler::run() {
  PosteriorDraws out;
  out.p = p_;
  out.n_train = n_;
  out.seed = config_.seed;
  out.prior = prior_;
  out.config = config_;
  out.config_hash = config_hash(prior_, config_);
  const int expected =
      (config_.n_iter - config_.n_burn) / config_.n_thin;
  out.draws.reserve(static_cast<std::size_t>(std::max(0, expected)));
  while (iter_ < config_.n_iter) {
    step();
    if (iter_ > config_.n_burn &&
        (iter_ - config_.n_burn) % config_.n_thin == 0) {
      out.draws.push_back(snapshot());
    }
  }
  out.stats = stats_;
  return out;
}

PosteriorDraws run_chain(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const PriorSpec& prior, const SamplerConfig& config) {
  Sampler sampler(X, y, prior, config);
  return sampler.run();
}

namespace {

// Shared column cache across draws: terms re-appear in most draws, so each
// unique multi-index is evaluated on the prediction grid once.
class PredictionWorkspace {
 public:
  PredictionWorkspace(const PosteriorDraws& draws, const Eigen::MatrixXd& x_new)
      : n_new_(static_cast<int>(x_new.rows())) {
    if (static_cast<int>(x_new.cols()) != draws.p)
      throw std::invalid_argument("predict: dimension mismatch");
    int d_max = 0;
    for (const auto& d : draws.draws) {
      for (const auto& t : d.terms) {
        for (int j = 0; j < t.dim(); ++j) d_max = std::max(d_max, t[j]);
      }
    }
    table_ = std::make_unique<LegendreTable>(x_new, d_max);
  }

  const Eigen::VectorXd& column(const MultiIndex& mi) {
    auto it = cache_.find(mi);
    if (it != cache_.end()) return columns_[it->second];
    columns_.push_back(table_->column(mi));
    cache_.emplace(mi, columns_.size() - 1);
    return columns_.back();
  }

  int n_new() const { return n_new_; }

 private:
  int n_new_;
  std::unique_ptr<LegendreTable> table_;
  std::unordered_map<MultiIndex, std::size_t, MultiIndexHash> cache_;
  std::vector<Eigen::VectorXd> columns_;
};

}  // namespace

Eigen::MatrixXd posterior_function_draws(const PosteriorDraws& draws,
                                         const Eigen::MatrixXd& x_new) {
  if (draws.draws.empty())
    throw std::invalid_argument("posterior_function_draws: no draws");
  PredictionWorkspace ws(draws, x_new);
  const int nd = static_cast<int>(draws.draws.size());
  Eigen::MatrixXd out(nd, ws.n_new());
  Eigen::VectorXd acc(ws.n_new());
  for (int d = 0; d < nd; ++d) {
    const Draw& dr = draws.draws[static_cast<std::size_t>(d)];
    acc.setConstant(dr.beta[0]);
    for (std::size_t t = 0; t < dr.terms.size(); ++t) {
      acc.noalias() +=
          dr.beta[static_cast<Eigen::Index>(t) + 1] * ws.column(dr.terms[t]);
    }
    out.row(d) = acc.transpose();
  }
  return out;
}

Eigen::MatrixXd predictive_samples(const PosteriorDraws& draws,
                                   const Eigen::MatrixXd& x_new,
                                   bool include_noise, Rng& rng) {
  Eigen::MatrixXd f = posterior_function_draws(draws, x_new);
  if (include_noise) {
    for (int d = 0; d < f.rows(); ++d) {
      const double sd =
          std::sqrt(draws.draws[static_cast<std::size_t>(d)].sigma2);
      for (int i = 0; i < f.cols(); ++i) f(d, i) += sd * rng.normal();
    }
  }
  return f;
}

PredictionSummary predict(const PosteriorDraws& draws,
                          const Eigen::MatrixXd& x_new,
                          const std::vector<double>& probs,
                          bool include_noise) {
  const Eigen::MatrixXd f = posterior_function_draws(draws, x_new);
  const int nd = static_cast<int>(f.rows());
  const int nn = static_cast<int>(f.cols());

  PredictionSummary out;
  out.probs = probs;
  out.mean.resize(nn);
  out.sd.resize(nn);
  out.quantiles.resize(nn, static_cast<int>(probs.size()));

  Eigen::VectorXd sigma(nd);
  for (int d = 0; d < nd; ++d)
    sigma[d] = include_noise
                   ? std::sqrt(draws.draws[static_cast<std::size_t>(d)].sigma2)
                   : 0.0;

  std::vector<double> values(static_cast<std::size_t>(nd));
  for (int i = 0; i < nn; ++i) {
    double m = 0.0, m2 = 0.0;
    for (int d = 0; d < nd; ++d) {
      m += f(d, i);
      m2 += f(d, i) * f(d, i) + sigma[d] * sigma[d];
    }
    m /= nd;
    m2 /= nd;
    out.mean[i] = m;
    out.sd[i] = std::sqrt(std::max(0.0, m2 - m * m));

    if (include_noise) {
      // Quantiles of the Gaussian mixture via bisection on its CDF.
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (int d = 0; d < nd; ++d) {
        lo = std::min(lo, f(d, i) - 8.0 * sigma[d] - 1e-12);
        hi = std::max(hi, f(d, i) + 8.0 * sigma[d] + 1e-12);
      }
      auto cdf = [&](double t) {
        double s = 0.0;
        for (int d = 0; d < nd; ++d) {
          s += (sigma[d] > 0.0) ? normal_cdf((t - f(d, i)) / sigma[d])
                                : (t >= f(d, i) ? 1.0 : 0.0);
        }
        return s / nd;
      };
      for (std::size_t qi = 0; qi < probs.size(); ++qi) {
        double a = lo, b = hi;
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (a + b);
          if (cdf(mid) < probs[qi]) {
            a = mid;
          } else {
            b = mid;
          }
        }
        out.quantiles(i, static_cast<int>(qi)) = 0.5 * (a + b);
      }
    } else {
      for (int d = 0; d < nd; ++d)
        values[static_cast<std::size_t>(d)] = f(d, i);
      std::sort(values.begin(), values.end());
      for (std::size_t qi = 0; qi < probs.size(); ++qi) {
        out.quantiles(i, static_cast<int>(qi)) =
            sorted_quantile(values, probs[qi]);
      }
    }
  }
  return out;
}

namespace {

void hash_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;  // FNV-1a prime
  }
}

template <typename T>
void hash_value(std::uint64_t& h, const T& v) {
  hash_bytes(h, &v, sizeof(v));
}

}  // namespace

std::uint64_t config_hash(const PriorSpec& prior, const SamplerConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV offset basis
  hash_value(h, static_cast<int>(prior.family));
  hash_value(h, prior.a_M);
  hash_value(h, prior.b_M);
  hash_value(h, prior.a_sigma);
  hash_value(h, prior.b_sigma);
  hash_value(h, prior.a_g);
  hash_value(h, prior.b_g);
  hash_value(h, prior.zeta);
  hash_value(h, prior.tau2);
  hash_value(h, prior.d_max);
  hash_value(h, prior.q_max);
  hash_value(h, prior.s_q);
  hash_value(h, prior.s_d);
  hash_value(h, prior.exact_sigma_conditional);
  const double fixed = prior.fixed_sigma2.value_or(-1.0);
  hash_value(h, fixed);
  hash_value(h, config.n_iter);
  hash_value(h, config.n_burn);
  hash_value(h, config.n_thin);
  hash_value(h, config.p_birth);
  hash_value(h, config.p_death);
  hash_value(h, config.m_max);
  hash_value(h, config.delayed_rejection_cap);
  hash_value(h, config.adapt_interval);
  hash_value(h, config.seed);
  return h;
}

}  // namespace khaos
