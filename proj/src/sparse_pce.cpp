#include "khaos/sparse_pce.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "khaos/bayes_linear.hpp"
#include "khaos/candidate_space.hpp"
#include "khaos/errors.hpp"
#include "khaos/legendre.hpp"

namespace khaos {

namespace {

constexpr double kCollinearTol = 1e-10;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

int table_degree(const std::vector<MultiIndex>& terms) {
  int d = 1;
  for (const auto& t : terms)
    for (int j = 0; j < t.dim(); ++j) d = std::max(d, t[j]);
  return d;
}

Eigen::MatrixXd candidate_columns(const std::vector<MultiIndex>& candidates,
                                  const Eigen::MatrixXd& X) {
  const LegendreTable table(X, table_degree(candidates));
  Eigen::MatrixXd cols(X.rows(), static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t j = 0; j < candidates.size(); ++j)
    table.column_into(candidates[j], cols.col(static_cast<Eigen::Index>(j)));
  return cols;
}

// Greedy orthogonal-matching-pursuit ordering on centered columns. Calls
// on_pick(position, rho2) for every placement; a false return stops the
// scan. Numerically collinear candidates are reported through `dead`.
void greedy_partial_order(const std::vector<MultiIndex>& candidates,
                          Eigen::MatrixXd& cols, Eigen::VectorXd& y_resid,
                          const std::function<bool(int, double)>& on_pick,
                          std::vector<char>& dead) {
  const Eigen::Index nc = cols.cols();
  const Eigen::Index n = cols.rows();
  dead.assign(static_cast<std::size_t>(nc), 0);
  std::vector<char> placed(static_cast<std::size_t>(nc), 0);

  Eigen::VectorXd orig_norm(nc);
  for (Eigen::Index j = 0; j < nc; ++j) orig_norm[j] = cols.col(j).norm();

  std::vector<Eigen::VectorXd> basis;  // placed orthonormal directions
  basis.reserve(64);

  const Eigen::Index max_steps = std::min<Eigen::Index>(nc, n - 2);
  for (Eigen::Index step = 0; step < max_steps; ++step) {
    const double ynorm2 = y_resid.squaredNorm();
    if (!(ynorm2 > 0.0)) break;

    int best = -1;
    double best_rho2 = -1.0;
    for (Eigen::Index j = 0; j < nc; ++j) {
      if (placed[static_cast<std::size_t>(j)] ||
          dead[static_cast<std::size_t>(j)])
        continue;
      const double cn2 = cols.col(j).squaredNorm();
      if (std::sqrt(cn2) < kCollinearTol * (orig_norm[j] + 1.0)) {
        dead[static_cast<std::size_t>(j)] = 1;
        continue;
      }
      const double dot = cols.col(j).dot(y_resid);
      const double rho2 = dot * dot / (cn2 * ynorm2);
      if (rho2 > best_rho2 ||
          (rho2 == best_rho2 && best >= 0 &&
           candidates[static_cast<std::size_t>(j)].graded_before(
               candidates[static_cast<std::size_t>(best)]))) {
        best = static_cast<int>(j);
        best_rho2 = rho2;
      }
    }
    if (best < 0) break;

    // Orthonormalize the winner against the placed set (one extra pass).
    Eigen::VectorXd e = cols.col(best);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) e -= b.dot(e) * b;
    }
    const double en = e.norm();
    if (en < kCollinearTol * (orig_norm[best] + 1.0)) {
      dead[static_cast<std::size_t>(best)] = 1;
      continue;
    }
    e /= en;

    if (!on_pick(best, best_rho2)) return;
    placed[static_cast<std::size_t>(best)] = 1;
    basis.push_back(e);

    y_resid -= e.dot(y_resid) * e;
    for (Eigen::Index j = 0; j < nc; ++j) {
      if (!placed[static_cast<std::size_t>(j)] &&
          !dead[static_cast<std::size_t>(j)])
        cols.col(j) -= e.dot(cols.col(j)) * e;
    }
  }
}

// Criterion evaluation on the original-scale columns of a nested model.
// Gram statistics grow incrementally so deep selection paths stay cheap.
class NestedScorer {
 public:
  NestedScorer(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               SparseCriterion criterion, const PriorSpec& prior)
      : x_(X),
        y_(y),
        criterion_(criterion),
        prior_(prior),
        n_(static_cast<int>(X.rows())) {
    sel_cols_.resize(n_, 1);
    sel_cols_.col(0).setOnes();
    gram_.resize(1, 1);
    gram_(0, 0) = static_cast<double>(n_);
    pty_.resize(1);
    pty_[0] = y.sum();
    yty_ = y.squaredNorm();
    terms_.clear();
    g0sq_ = static_cast<double>(n_);  // unit-information scale
  }

  /// Criterion for the current selected set plus (optionally) one extra
  /// column. Larger is better. Returns -inf on rank failure.
  double score_with(const MultiIndex* extra, const Eigen::VectorXd* col) {
    const int k0 = static_cast<int>(sel_cols_.cols());
    const int k = k0 + (extra ? 1 : 0);
    GaussianLinearStats stats;
    stats.gram.resize(k, k);
    stats.gram.topLeftCorner(k0, k0) = gram_;
    stats.psi_t_y.resize(k);
    stats.psi_t_y.head(k0) = pty_;
    std::vector<MultiIndex> full;
    full.reserve(static_cast<std::size_t>(k));
    full.push_back(MultiIndex::intercept(static_cast<int>(x_.cols())));
    full.insert(full.end(), terms_.begin(), terms_.end());
    if (extra) {
      last_cross_.noalias() = sel_cols_.transpose() * (*col);
      stats.gram.block(0, k0, k0, 1) = last_cross_;
      stats.gram.block(k0, 0, 1, k0) = last_cross_.transpose();
      stats.gram(k0, k0) = col->squaredNorm();
      stats.psi_t_y[k0] = col->dot(y_);
      full.push_back(*extra);
    }
    stats.yty = yty_;
    stats.n = n_;
    try {
      if (criterion_ == SparseCriterion::kBayesFactor) {
        PriorSpec p = prior_;
        p.family = PriorFamily::kModifiedGPrior;
        const auto cp = conditional_posterior(
            stats, prior_cov_inverse(full, p, g0sq_), p);
        return cp.log_marginal;
      }
      return kic_score(stats, k);
    } catch (const NumericalRankError&) {
      return -std::numeric_limits<double>::infinity();
    }
  }

  void commit(const MultiIndex& mi, const Eigen::VectorXd& col) {
    const int k0 = static_cast<int>(sel_cols_.cols());
    Eigen::VectorXd cross = sel_cols_.transpose() * col;
    sel_cols_.conservativeResize(Eigen::NoChange, k0 + 1);
    sel_cols_.col(k0) = col;
    gram_.conservativeResize(k0 + 1, k0 + 1);
    gram_.block(0, k0, k0, 1) = cross;
    gram_.block(k0, 0, 1, k0) = cross.transpose();
    gram_(k0, k0) = col.squaredNorm();
    pty_.conservativeResize(k0 + 1);
    pty_[k0] = col.dot(y_);
    terms_.push_back(mi);
  }

  const std::vector<MultiIndex>& terms() const { return terms_; }
  double g0sq() const { return g0sq_; }

 private:
  // Kashyap-type Laplace evidence approximation (flat prior, observed
  // information Psi'Psi / sigma_hat^2); larger is better. The exact constant
  // terms of the original criterion are not reproduced here, which is why
  // the Bayes-factor criterion is the default.
  double kic_score(const GaussianLinearStats& stats, int k) const {
    Eigen::LLT<Eigen::MatrixXd> llt(stats.gram);
    if (llt.info() != Eigen::Success)
      return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd beta = llt.solve(stats.psi_t_y);
    const double rss =
        std::max(1e-300, stats.yty - stats.psi_t_y.dot(beta));
    const double sigma2 = rss / stats.n;
    double log_det = 0.0;
    const Eigen::MatrixXd lower = llt.matrixL();
    for (int i = 0; i < k; ++i) log_det += 2.0 * std::log(lower(i, i));
    const double max_loglik = -0.5 * stats.n * (kLog2Pi + std::log(sigma2) + 1.0);
    return max_loglik + 0.5 * k * (kLog2Pi + std::log(sigma2)) - 0.5 * log_det;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  SparseCriterion criterion_;
  PriorSpec prior_;
  int n_;
  Eigen::MatrixXd sel_cols_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd pty_;
  double yty_ = 0.0;
  Eigen::VectorXd last_cross_;
  std::vector<MultiIndex> terms_;
  double g0sq_ = 1.0;
};

// Path cap for the nested criterion scan.
int path_cap(std::size_t n_candidates, int n) {
  return static_cast<int>(std::min<std::size_t>(
      {n_candidates, static_cast<std::size_t>(std::max(1, n / 3)), 250}));
}

// The selection rule, read off the evaluated criterion path: the largest m
// whose criterion improves on its predecessor (zero when nothing ever
// improves). Under noise the criterion can wiggle far along the path, so
// late upticks inflate the selected size; that is the documented behaviour
// of the original greedy procedure rather than something to smooth away.
int largest_improving_size(const std::vector<double>& scores) {
  int m_star = 0;
  for (std::size_t m = 1; m < scores.size(); ++m) {
    if (scores[m] > scores[m - 1]) m_star = static_cast<int>(m);
  }
  return m_star;
}

struct StageResult {
  std::vector<MultiIndex> selected;
  std::vector<double> score_path;
  double score = -std::numeric_limits<double>::infinity();
  /// Best criterion value anywhere on the stage's nested path; enrichment
  /// keeps going while this improves.
  double best_score = -std::numeric_limits<double>::infinity();
};

StageResult run_stage(const std::vector<MultiIndex>& candidates,
                      const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const SparseOptions& options) {
  StageResult out;

  // Step 3 ordering: marginal squared correlation, computed streaming so no
  // extra candidate-matrix copy is held.
  const std::vector<int> corr_order = [&] {
    const LegendreTable table(X, table_degree(candidates));
    Eigen::VectorXd col(X.rows());
    const double ym = y.mean();
    const double ysd2 = (y.array() - ym).square().sum();
    std::vector<std::pair<double, int>> scored;
    scored.reserve(candidates.size());
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      table.column_into(candidates[j], col);
      const double cm = col.mean();
      const double cs2 = (col.array() - cm).square().sum();
      double r2 = 0.0;
      if (cs2 > 0.0 && ysd2 > 0.0) {
        const double cov = ((col.array() - cm) * (y.array() - ym)).sum();
        r2 = cov * cov / (cs2 * ysd2);
      }
      scored.emplace_back(r2, static_cast<int>(j));
    }
    std::stable_sort(scored.begin(), scored.end(), [&](const auto& a,
                                                       const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return candidates[static_cast<std::size_t>(a.second)].graded_before(
          candidates[static_cast<std::size_t>(b.second)]);
    });
    std::vector<int> perm;
    perm.reserve(scored.size());
    for (const auto& [r2, j] : scored) perm.push_back(j);
    return perm;
  }();

  std::vector<MultiIndex> cand_sorted;
  cand_sorted.reserve(candidates.size());
  for (int j : corr_order)
    cand_sorted.push_back(candidates[static_cast<std::size_t>(j)]);

  Eigen::MatrixXd cols_sorted = candidate_columns(cand_sorted, X);

  // Center for the partial-correlation recursion (the intercept is always
  // in the model).
  Eigen::MatrixXd centered = cols_sorted;
  for (Eigen::Index j = 0; j < centered.cols(); ++j)
    centered.col(j).array() -= centered.col(j).mean();
  Eigen::VectorXd y_resid = y.array() - y.mean();

  NestedScorer scorer(X, y, options.criterion, options.prior);
  out.score_path.push_back(scorer.score_with(nullptr, nullptr));

  const int cap = path_cap(candidates.size(), static_cast<int>(X.rows()));
  std::vector<char> dead;
  greedy_partial_order(
      cand_sorted, centered, y_resid,
      [&](int pos, double /*rho2*/) {
        const Eigen::VectorXd col = cols_sorted.col(pos);
        const double s =
            scorer.score_with(&cand_sorted[static_cast<std::size_t>(pos)], &col);
        out.score_path.push_back(s);
        if (!std::isfinite(s)) return false;  // rank trouble: end the path
        scorer.commit(cand_sorted[static_cast<std::size_t>(pos)], col);
        return static_cast<int>(scorer.terms().size()) < cap;
      },
      dead);

  const int m_star = largest_improving_size(out.score_path);
  out.selected.assign(scorer.terms().begin(),
                      scorer.terms().begin() + m_star);
  out.score = out.score_path[static_cast<std::size_t>(m_star)];
  out.best_score = -std::numeric_limits<double>::infinity();
  for (double s : out.score_path)
    if (std::isfinite(s)) out.best_score = std::max(out.best_score, s);
  return out;
}

}  // namespace

std::vector<int> rank_by_correlation(const std::vector<MultiIndex>& candidates,
                                     const Eigen::MatrixXd& X,
                                     const Eigen::VectorXd& y) {
  if (candidates.empty()) return {};
  const Eigen::MatrixXd cols = candidate_columns(candidates, X);
  const double ym = y.mean();
  const double ysd2 = (y.array() - ym).square().sum();
  std::vector<std::pair<double, int>> scored;
  scored.reserve(candidates.size());
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    const double cm = cols.col(j).mean();
    const double cs2 = (cols.col(j).array() - cm).square().sum();
    double r2 = 0.0;
    if (cs2 > 0.0 && ysd2 > 0.0) {
      const double cov = ((cols.col(j).array() - cm) * (y.array() - ym)).sum();
      r2 = cov * cov / (cs2 * ysd2);
    }
    scored.emplace_back(r2, static_cast<int>(j));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [&](const auto& a, const auto& b) {
                     if (a.first != b.first) return a.first > b.first;
                     return candidates[static_cast<std::size_t>(a.second)]
                         .graded_before(
                             candidates[static_cast<std::size_t>(b.second)]);
                   });
  std::vector<int> perm;
  perm.reserve(scored.size());
  for (const auto& [r2, j] : scored) perm.push_back(j);
  return perm;
}

std::vector<int> rank_by_partial_correlation(
    const std::vector<MultiIndex>& candidates, const Eigen::MatrixXd& X,
    const Eigen::VectorXd& y) {
  if (candidates.empty()) return {};
  Eigen::MatrixXd cols = candidate_columns(candidates, X);
  for (Eigen::Index j = 0; j < cols.cols(); ++j)
    cols.col(j).array() -= cols.col(j).mean();
  Eigen::VectorXd y_resid = y.array() - y.mean();

  std::vector<int> order;
  order.reserve(candidates.size());
  std::vector<char> dead;
  greedy_partial_order(
      candidates, cols, y_resid,
      [&](int pos, double) {
        order.push_back(pos);
        return true;
      },
      dead);
  // Anything unplaced (collinear or ran out of residual) goes last, in
  // input order with rho2 = 0.
  std::vector<char> placed(candidates.size(), 0);
  for (int j : order) placed[static_cast<std::size_t>(j)] = 1;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (!placed[j]) order.push_back(static_cast<int>(j));
  }
  return order;
}

int select_model_size(const std::vector<MultiIndex>& ordered_candidates,
                      const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      SparseCriterion criterion, const PriorSpec& prior,
                      std::vector<double>* scores) {
  if (ordered_candidates.empty())
    throw std::invalid_argument("select_model_size: no candidates");
  const Eigen::MatrixXd cols = candidate_columns(ordered_candidates, X);
  NestedScorer scorer(X, y, criterion, prior);
  std::vector<double> path;
  path.push_back(scorer.score_with(nullptr, nullptr));
  const int cap =
      path_cap(ordered_candidates.size(), static_cast<int>(X.rows()));
  for (int m = 0; m < cap; ++m) {
    const Eigen::VectorXd col = cols.col(m);
    const double s =
        scorer.score_with(&ordered_candidates[static_cast<std::size_t>(m)],
                          &col);
    if (!std::isfinite(s)) break;
    path.push_back(s);
    scorer.commit(ordered_candidates[static_cast<std::size_t>(m)], col);
  }
  if (scores) *scores = path;
  return largest_improving_size(path);
}

SparseFit fit_sparse(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const SparseOptions& options) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (y.size() != n) throw std::invalid_argument("fit_sparse: length mismatch");
  if (n < 4) throw std::invalid_argument("fit_sparse: too few rows");

  int d_cur = std::max(1, options.initial_d_max);
  int q_cur = std::min({options.initial_q_max, p, d_cur});
  q_cur = std::max(1, q_cur);

  SparseFit fit;
  fit.p = p;
  fit.n = n;

  StageResult last_stage;
  bool have_stage = false;
  double prev_score = -std::numeric_limits<double>::infinity();
  int stage = 0;
  for (;;) {
    const CandidateSpace space(p, d_cur, q_cur);
    std::vector<MultiIndex> candidates;
    try {
      candidates = enumerate_candidates(space, options.candidate_cap);
    } catch (const CapacityError&) {
      if (!have_stage) throw;  // first stage over the cap is an error
      break;                   // otherwise stop enriching
    }

    StageResult stage_result = run_stage(candidates, X, y, options);
    fit.enrichment_history.emplace_back(d_cur, q_cur);
    fit.score_path.insert(fit.score_path.end(),
                          stage_result.score_path.begin(),
                          stage_result.score_path.end());

    // An enrichment pays off when the enriched candidate set achieves a
    // better criterion value somewhere on its nested path than the
    // incumbent selected model scored.
    const bool improved = !have_stage || stage_result.best_score > prev_score;
    prev_score = stage_result.score;
    last_stage = std::move(stage_result);
    have_stage = true;
    ++stage;

    if (!options.enrichment) break;
    if (!improved) break;  // stop once an enrichment fails to pay off
    if (stage > options.max_enrichments) break;

    bool bump_d = false;
    bool bump_q = false;
    for (const auto& t : last_stage.selected) {
      if (t.degree() >= d_cur) bump_d = true;
      if (t.order() >= q_cur) bump_q = true;
    }
    if (!bump_d && !bump_q) break;
    if (bump_d && d_cur < kMaxLegendreDegree) ++d_cur;
    if (bump_q) q_cur = std::min({q_cur + 1, p, d_cur});
    if (fit.enrichment_history.back() == std::make_pair(d_cur, q_cur))
      break;  // limits cannot move further
  }

  fit.selected = last_stage.selected;
  fit.score = last_stage.score;

  // Conjugate posterior at the selected model (unit-information modified
  // g-prior, matching the selection criterion).
  std::vector<MultiIndex> full;
  full.push_back(MultiIndex::intercept(p));
  full.insert(full.end(), fit.selected.begin(), fit.selected.end());
  const LegendreTable table(X, table_degree(full));
  Eigen::MatrixXd cols(n, static_cast<Eigen::Index>(full.size()));
  for (std::size_t j = 0; j < full.size(); ++j)
    table.column_into(full[j], cols.col(static_cast<Eigen::Index>(j)));
  GaussianLinearStats stats;
  stats.gram.noalias() = cols.transpose() * cols;
  stats.psi_t_y.noalias() = cols.transpose() * y;
  stats.yty = y.squaredNorm();
  stats.n = n;
  PriorSpec post_prior = options.prior;
  post_prior.family = PriorFamily::kModifiedGPrior;
  fit.g0sq_used = static_cast<double>(n);
  const auto cp = conditional_posterior(
      stats, prior_cov_inverse(full, post_prior, fit.g0sq_used), post_prior);
  fit.beta_hat = cp.mu;
  fit.chol_precision = cp.chol_lower;
  fit.a_n = post_prior.a_sigma + 0.5 * n;
  fit.b_n = post_prior.b_sigma + 0.5 * cp.resid_quad;
  fit.sigma2_hat = fit.b_n / (fit.a_n - 1.0);
  return fit;
}

namespace {

Eigen::MatrixXd prediction_columns(const SparseFit& fit,
                                   const Eigen::MatrixXd& x_new) {
  if (static_cast<int>(x_new.cols()) != fit.p)
    throw std::invalid_argument("sparse_predict: dimension mismatch");
  std::vector<MultiIndex> full;
  full.push_back(MultiIndex::intercept(fit.p));
  full.insert(full.end(), fit.selected.begin(), fit.selected.end());
  const LegendreTable table(x_new, table_degree(full));
  Eigen::MatrixXd cols(x_new.rows(), static_cast<Eigen::Index>(full.size()));
  for (std::size_t j = 0; j < full.size(); ++j)
    table.column_into(full[j], cols.col(static_cast<Eigen::Index>(j)));
  return cols;
}

}  // namespace

SparsePrediction sparse_predict(const SparseFit& fit,
                                const Eigen::MatrixXd& x_new) {
  const Eigen::MatrixXd cols = prediction_columns(fit, x_new);
  SparsePrediction out;
  out.mean = cols * fit.beta_hat;
  out.sd.resize(cols.rows());
  for (Eigen::Index i = 0; i < cols.rows(); ++i) {
    const Eigen::VectorXd w =
        fit.chol_precision.triangularView<Eigen::Lower>().solve(
            cols.row(i).transpose());
    out.sd[i] = std::sqrt(fit.sigma2_hat * (1.0 + w.squaredNorm()));
  }
  return out;
}

Eigen::MatrixXd sparse_predictive_samples(const SparseFit& fit,
                                          const Eigen::MatrixXd& x_new,
                                          int n_samples, bool include_noise,
                                          Rng& rng) {
  if (n_samples < 1)
    throw std::invalid_argument("sparse_predictive_samples: n_samples < 1");
  const Eigen::MatrixXd cols = prediction_columns(fit, x_new);
  const Eigen::Index k = cols.cols();
  Eigen::MatrixXd out(n_samples, cols.rows());
  Eigen::VectorXd z(k);
  for (int s = 0; s < n_samples; ++s) {
    const double sigma2 = rng.inv_gamma(fit.a_n, fit.b_n);
    for (Eigen::Index i = 0; i < k; ++i) z[i] = rng.normal();
    const Eigen::VectorXd beta =
        fit.beta_hat +
        std::sqrt(sigma2) *
            fit.chol_precision.transpose().triangularView<Eigen::Upper>().solve(
                z);
    Eigen::VectorXd row = cols * beta;
    if (include_noise) {
      const double sd = std::sqrt(sigma2);
      for (Eigen::Index i = 0; i < row.size(); ++i) row[i] += sd * rng.normal();
    }
    out.row(s) = row.transpose();
  }
  return out;
}

}  // namespace khaos
