#include "khaos/bayes_linear.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "khaos/errors.hpp"
#include "khaos/stats.hpp"

namespace khaos {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Lower Cholesky factor, or NumericalRankError.
Eigen::MatrixXd chol_or_throw(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericalRankError(std::string(what) + ": Cholesky failed");
  return llt.matrixL();
}

double log_det_from_chol(const Eigen::MatrixXd& lower) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    const double d = lower(i, i);
    if (!(d > 0.0) || !std::isfinite(d))
      throw NumericalRankError("log_det: nonpositive pivot");
    s += std::log(d);
  }
  return 2.0 * s;
}

}  // namespace

GaussianLinearStats make_stats(const BasisSet& basis,
                               const Eigen::VectorXd& y) {
  if (y.size() != basis.n())
    throw std::invalid_argument("make_stats: response length mismatch");
  GaussianLinearStats s;
  s.gram = basis.gram();
  s.psi_t_y.noalias() = basis.columns().transpose() * y;
  s.yty = y.squaredNorm();
  s.n = basis.n();
  return s;
}

PriorCovInverse prior_cov_inverse(const std::vector<MultiIndex>& indices,
                                  const PriorSpec& prior, double g0sq) {
  if (prior.family == PriorFamily::kRidge)
    return PriorCovInverse::ridge(prior.tau2);
  return PriorCovInverse::gprior_flat_intercept(
      shrink_weights(indices, prior.effective_zeta()), g0sq, prior.tau2);
}

ConditionalPosterior conditional_posterior(const GaussianLinearStats& stats,
                                           const PriorCovInverse& pci,
                                           const PriorSpec& prior) {
  const int m1 = static_cast<int>(stats.gram.rows());
  ConditionalPosterior cp;
  cp.n = stats.n;

  double log_det_gram = 0.0;
  if (!pci.is_ridge()) {
    if (pci.flat_intercept()) {
      if (m1 > 1) {
        log_det_gram = log_det_from_chol(
            chol_or_throw(stats.gram.bottomRightCorner(m1 - 1, m1 - 1),
                          "gram block"));
      }
    } else {
      log_det_gram = log_det_from_chol(chol_or_throw(stats.gram, "gram"));
    }
  }
  const Eigen::MatrixXd a = pci.posterior_precision(stats.gram);
  cp.chol_lower = chol_or_throw(a, "posterior precision");

  // mu = A^-1 Psi'y via the factorization.
  Eigen::VectorXd w = cp.chol_lower.triangularView<Eigen::Lower>().solve(
      stats.psi_t_y);
  cp.mu = cp.chol_lower.transpose().triangularView<Eigen::Upper>().solve(w);

  cp.log_det_sigma_n = -log_det_from_chol(cp.chol_lower);
  cp.resid_quad = std::max(0.0, stats.yty - stats.psi_t_y.dot(cp.mu));

  const double log_det_s0 = pci.log_det_S0(m1, log_det_gram);
  if (prior.fixed_sigma2) {
    const double s2 = *prior.fixed_sigma2;
    cp.log_marginal = -0.5 * stats.n * (kLog2Pi + std::log(s2)) -
                      0.5 * log_det_s0 + 0.5 * cp.log_det_sigma_n -
                      0.5 * cp.resid_quad / s2;
  } else {
    const double a_s = prior.a_sigma;
    const double b_s = prior.b_sigma;
    cp.log_marginal = -0.5 * stats.n * kLog2Pi - 0.5 * log_det_s0 +
                      0.5 * cp.log_det_sigma_n + a_s * std::log(b_s) -
                      (a_s + 0.5 * stats.n) * std::log(b_s + 0.5 * cp.resid_quad) +
                      std::lgamma(a_s + 0.5 * stats.n) - std::lgamma(a_s);
  }
  return cp;
}

ConditionalPosterior conditional_posterior(const BasisSet& basis,
                                           const Eigen::VectorXd& y,
                                           const PriorSpec& prior,
                                           double g0sq) {
  return conditional_posterior(make_stats(basis, y),
                               prior_cov_inverse(basis.indices(), prior, g0sq),
                               prior);
}

BetaSigmaDraw gibbs_beta_sigma(const ConditionalPosterior& cp,
                               const Eigen::Ref<const Eigen::MatrixXd>& columns,
                               const Eigen::VectorXd& y,
                               const Eigen::VectorXd& beta_prev,
                               const PriorSpec& prior,
                               const PriorCovInverse& pci,
                               const Eigen::Ref<const Eigen::MatrixXd>& gram,
                               Rng& rng) {
  if (columns.cols() != beta_prev.size())
    throw std::invalid_argument("gibbs_beta_sigma: beta length mismatch");
  BetaSigmaDraw out;
  if (prior.fixed_sigma2) {
    out.sigma2 = *prior.fixed_sigma2;
  } else {
    const double rss = (y - columns * beta_prev).squaredNorm();
    double shape = prior.a_sigma + 0.5 * cp.n;
    double rate = prior.b_sigma + 0.5 * rss;
    if (prior.exact_sigma_conditional) {
      const Eigen::MatrixXd s0inv = pci.s0_inverse(gram);
      shape += 0.5 * static_cast<double>(beta_prev.size());
      rate += 0.5 * beta_prev.dot(s0inv * beta_prev);
    }
    out.sigma2 = rng.inv_gamma(shape, rate);
  }
  out.beta = draw_beta(cp, out.sigma2, rng);
  return out;
}

Eigen::VectorXd draw_beta(const ConditionalPosterior& cp, double sigma2,
                          Rng& rng) {
  Eigen::VectorXd z(cp.mu.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  // beta = mu + sigma L^-T z, since Sigma_n = (L L')^-1.
  Eigen::VectorXd x =
      cp.chol_lower.transpose().triangularView<Eigen::Upper>().solve(z);
  return cp.mu + std::sqrt(sigma2) * x;
}

double gibbs_lambda(int num_terms, const PriorSpec& prior, Rng& rng) {
  if (num_terms < 0) throw std::invalid_argument("gibbs_lambda: M < 0");
  return rng.gamma(prior.a_M + num_terms, prior.b_M + 1.0);
}

LaplaceFit laplace_g0(const Eigen::VectorXd& g_non_intercept,
                      const PriorSpec& prior) {
  const double a = prior.a_g;
  const double b = prior.b_g;
  LaplaceFit fit;
  if (g_non_intercept.size() == 0) {
    // Empty product: the conditional posterior is the prior itself.
    fit.a_hat = a;
    fit.b_hat = b;
    fit.mode = b / (a + 1.0);
    return fit;
  }
  const Eigen::ArrayXd g2 = g_non_intercept.array().square();

  double theta = b / a;
  constexpr int kMaxIter = 200;
  int k = 0;
  for (; k < kMaxIter; ++k) {
    const double big_g = 0.5 * (g2 / (1.0 + theta * g2)).sum();
    const double theta_new =
        (-a + std::sqrt(a * a + 4.0 * b * big_g)) / (2.0 * big_g);
    if (std::abs(theta_new - theta) < 1e-10 * theta_new) {
      theta = theta_new;
      ++k;
      break;
    }
    theta = theta_new;
  }
  if (k >= kMaxIter)
    throw ConvergenceError("laplace_g0: fixed point did not converge", theta);

  // Curvature of h at the mode.
  const double h2 = a / (theta * theta) - 2.0 * b / (theta * theta * theta) +
                    0.5 * (g2.square() / (1.0 + theta * g2).square()).sum();
  double s2;
  if (h2 < 0.0) {
    s2 = -1.0 / h2;
  } else {
    // Degenerate curvature; fall back to the prior's spread at this mode.
    s2 = theta * theta / (a + 1.0);
  }
  fit.mode = theta;
  fit.iterations = k;
  fit.a_hat = 2.0 + theta * theta / s2;
  fit.b_hat = theta * fit.a_hat;
  return fit;
}

namespace {

// Residual quadratic form -(a+n/2) log(b + R/2) (or -R/(2 sigma0^2) under a
// pinned noise variance): the beta- and sigma^2-marginalized likelihood's
// dependence on g0^2 through the shrinkage of mu_n.
double marginal_fit_term(double resid_quad, int n, const PriorSpec& prior) {
  if (prior.fixed_sigma2)
    return -0.5 * resid_quad / *prior.fixed_sigma2;
  return -(prior.a_sigma + 0.5 * n) *
         std::log(prior.b_sigma + 0.5 * resid_quad);
}

}  // namespace

double g0_log_target(double g0sq, const Eigen::VectorXd& g_full,
                     const GaussianLinearStats& stats,
                     const PriorSpec& prior) {
  if (!(g0sq > 0.0)) return -std::numeric_limits<double>::infinity();
  const Eigen::Index m = g_full.size() - 1;  // non-intercept count
  const double a = prior.a_g;
  const double b = prior.b_g;
  double t = -(a + 1.0 + 0.5 * m) * std::log(g0sq) - b / g0sq;
  if (m > 0) {
    const auto pci =
        PriorCovInverse::gprior_flat_intercept(g_full, g0sq, prior.tau2);
    Eigen::LLT<Eigen::MatrixXd> llt(pci.posterior_precision(stats.gram));
    if (llt.info() != Eigen::Success)
      return -std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd lower = llt.matrixL();
    t -= 0.5 * log_det_from_chol(lower);
    const Eigen::VectorXd mu = llt.solve(stats.psi_t_y);
    const double resid = std::max(0.0, stats.yty - stats.psi_t_y.dot(mu));
    t += marginal_fit_term(resid, stats.n, prior);
  }
  return t;
}

namespace {

// Orthogonal-design approximation of g0_log_target: with Psi'Psi ~ n I the
// shrinkage acts per column, so the whole profile costs O(M) to evaluate.
// Used to place the Metropolis-Hastings proposal.
class OrthogonalDataProfile {
 public:
  OrthogonalDataProfile(const Eigen::VectorXd& g_full,
                        const GaussianLinearStats& stats,
                        const PriorSpec& prior)
      : prior_(prior), n_(stats.n) {
    const Eigen::Index m1 = g_full.size();
    g2_ = g_full.tail(m1 - 1).array().square();
    proj_.resize(m1 - 1);
    double base = stats.yty;
    // Intercept is unshrunk: its projection leaves the residual base.
    const double denom0 = std::max(stats.gram(0, 0), 1e-300);
    base -= stats.psi_t_y[0] * stats.psi_t_y[0] / denom0;
    for (Eigen::Index j = 1; j < m1; ++j) {
      const double cn = std::max(stats.gram(j, j), 1e-300);
      proj_[j - 1] = stats.psi_t_y[j] * stats.psi_t_y[j] / cn;
    }
    base_resid_ = std::max(base, 1e-12 * stats.yty + 1e-300);
  }

  double operator()(double theta) const {
    if (!(theta > 0.0)) return -std::numeric_limits<double>::infinity();
    double t = -(prior_.a_g + 1.0) * std::log(theta) - prior_.b_g / theta;
    double resid = base_resid_;
    for (Eigen::Index j = 0; j < g2_.size(); ++j) {
      const double s = theta * g2_[j];
      t -= 0.5 * std::log1p(s);
      resid -= proj_[j] * s / (1.0 + s);
    }
    resid = std::max(resid, 1e-12 * base_resid_);
    return t + marginal_fit_term(resid, n_, prior_);
  }

 private:
  PriorSpec prior_;
  int n_;
  Eigen::ArrayXd g2_;
  Eigen::VectorXd proj_;
  double base_resid_ = 1.0;
};

}  // namespace

LaplaceFit laplace_g0_newton(const Eigen::VectorXd& g_full,
                             const GaussianLinearStats& stats,
                             const PriorSpec& prior) {
  const Eigen::Index m1 = g_full.size();
  const Eigen::Index m = m1 - 1;
  if (m == 0) return laplace_g0(Eigen::VectorXd(), prior);

  const double a = prior.a_g;
  const double b = prior.b_g;
  const double shape = a + 1.0 + 0.5 * static_cast<double>(m);

  // dA/dtheta = -theta^-2 Bt, where Bt is the non-intercept block of
  // D(g)^-1 Psi'Psi D(g)^-1 (zero elsewhere); the trace identities below
  // follow from Jacobi's formula.
  Eigen::MatrixXd bt = Eigen::MatrixXd::Zero(m1, m1);
  for (Eigen::Index i = 1; i < m1; ++i)
    for (Eigen::Index j = 1; j < m1; ++j)
      bt(i, j) = stats.gram(i, j) / (g_full[i] * g_full[j]);

  double theta = laplace_g0(g_full.tail(m), prior).mode;
  double grad = 0.0, hess = -1.0;
  auto eval = [&](double th, double& g_out, double& h_out) {
    const auto pci =
        PriorCovInverse::gprior_flat_intercept(g_full, th, prior.tau2);
    const Eigen::MatrixXd prec = pci.posterior_precision(stats.gram);
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success)
      throw NumericalRankError("laplace_g0_newton: indefinite precision");
    const Eigen::MatrixXd ainv_bt = llt.solve(bt);
    const double tr1 = ainv_bt.trace();
    const double tr2 = (ainv_bt * ainv_bt).trace();
    const double th2 = th * th;
    g_out = -shape / th + b / th2 + 0.5 * tr1 / th2;
    h_out = shape / th2 - 2.0 * b / (th2 * th) - tr1 / (th2 * th) +
            0.5 * tr2 / (th2 * th2);

    // Fit term: R(theta) = y'y - u' A^-1 u with u = Psi'y.
    const Eigen::VectorXd v = llt.solve(stats.psi_t_y);
    const double resid = std::max(1e-300, stats.yty - stats.psi_t_y.dot(v));
    const Eigen::VectorXd btv = bt * v;
    const Eigen::VectorXd w = llt.solve(btv);
    const double r1 = -v.dot(btv) / th2;                    // dR/dtheta
    const double r2 = 2.0 * v.dot(btv) / (th2 * th) -      // d2R/dtheta2
                      2.0 * btv.dot(w) / (th2 * th2);
    if (prior.fixed_sigma2) {
      const double s2 = *prior.fixed_sigma2;
      g_out += -0.5 * r1 / s2;
      h_out += -0.5 * r2 / s2;
    } else {
      const double c = prior.a_sigma + 0.5 * stats.n;
      const double denom = prior.b_sigma + 0.5 * resid;
      g_out += -c * 0.5 * r1 / denom;
      h_out += -c * (0.5 * r2 / denom - 0.25 * r1 * r1 / (denom * denom));
    }
  };

  constexpr int kMaxIter = 100;
  int k = 0;
  eval(theta, grad, hess);
  for (; k < kMaxIter && std::abs(grad) > 1e-12 * (1.0 + shape / theta); ++k) {
    double step = (hess < 0.0) ? -grad / hess : grad * theta * theta / shape;
    double theta_new = theta + step;
    double g_new, h_new;
    int halvings = 0;
    for (;;) {
      if (theta_new <= 0.0) theta_new = 0.5 * theta;
      eval(theta_new, g_new, h_new);
      if (std::abs(g_new) <= std::abs(grad) || halvings >= 30) break;
      step *= 0.5;
      theta_new = theta + step;
      ++halvings;
    }
    if (std::abs(theta_new - theta) < 1e-12 * theta_new) {
      theta = theta_new;
      grad = g_new;
      hess = h_new;
      break;
    }
    theta = theta_new;
    grad = g_new;
    hess = h_new;
  }
  if (k >= kMaxIter)
    throw ConvergenceError("laplace_g0_newton: no convergence", theta);

  double s2 = (hess < 0.0) ? -1.0 / hess : theta * theta / (a + 1.0);
  LaplaceFit fit;
  fit.mode = theta;
  fit.iterations = k;
  fit.a_hat = 2.0 + theta * theta / s2;
  fit.b_hat = theta * fit.a_hat;
  return fit;
}

namespace {

// Inverse-gamma proposal fitted to the orthogonal-design data profile by a
// golden-section mode search plus finite-difference curvature. O(M) per
// evaluation, so the fit costs next to nothing per sweep.
LaplaceFit fit_proposal_from_profile(const Eigen::VectorXd& g_full,
                                     const GaussianLinearStats& stats,
                                     const PriorSpec& prior) {
  const OrthogonalDataProfile profile(g_full, stats, prior);
  // Golden section on log theta.
  double lo = std::log(1e-8), hi = std::log(1e12);
  const double golden = 0.6180339887498949;
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = profile(std::exp(x1));
  double f2 = profile(std::exp(x2));
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = profile(std::exp(x2));
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = profile(std::exp(x1));
    }
  }
  const double mode = std::exp(0.5 * (lo + hi));
  const double h = 1e-4 * mode;
  const double f0 = profile(mode);
  const double fp = profile(mode + h);
  const double fm = profile(mode - h);
  const double second = (fp - 2.0 * f0 + fm) / (h * h);
  double s2 = (second < 0.0) ? -1.0 / second : mode * mode / (prior.a_g + 1.0);

  LaplaceFit fit;
  fit.mode = mode;
  fit.a_hat = 2.0 + mode * mode / s2;
  fit.b_hat = mode * fit.a_hat;
  return fit;
}

}  // namespace

G0Update mh_update_g0(double current, const Eigen::VectorXd& g_full,
                      const GaussianLinearStats& stats, const PriorSpec& prior,
                      Rng& rng) {
  const Eigen::Index m = g_full.size() - 1;
  LaplaceFit fit;
  if (m == 0) {
    fit.a_hat = prior.a_g;  // posterior equals the prior
    fit.b_hat = prior.b_g;
  } else {
    try {
      fit = fit_proposal_from_profile(g_full, stats, prior);
    } catch (const std::exception&) {
      fit.a_hat = prior.a_g;
      fit.b_hat = prior.b_g;
    }
  }
  // Defensive mixture: mostly the Laplace fit, with a prior component that
  // keeps the reverse density bounded away from zero. An independence
  // sampler with a bare concentrated proposal deadlocks whenever the chain
  // sits in the proposal's far tail.
  constexpr double kPriorWeight = 0.2;
  auto log_proposal = [&](double v) {
    const double lap = inv_gamma_log_pdf(v, fit.a_hat, fit.b_hat);
    const double pri = inv_gamma_log_pdf(v, prior.a_g, prior.b_g);
    const double hi = std::max(lap + std::log1p(-kPriorWeight),
                               pri + std::log(kPriorWeight));
    const double lo = std::min(lap + std::log1p(-kPriorWeight),
                               pri + std::log(kPriorWeight));
    return hi + std::log1p(std::exp(lo - hi));
  };
  const double cand = (rng.uniform() < kPriorWeight)
                          ? rng.inv_gamma(prior.a_g, prior.b_g)
                          : rng.inv_gamma(fit.a_hat, fit.b_hat);
  const double log_t_cand = g0_log_target(cand, g_full, stats, prior);
  const double log_t_curr = g0_log_target(current, g_full, stats, prior);
  const double log_ratio = log_t_cand - log_t_curr + log_proposal(current) -
                           log_proposal(cand);
  G0Update out;
  if (std::isfinite(log_t_cand) &&
      std::log(rng.uniform_open()) < log_ratio) {
    out.value = cand;
    out.accepted = true;
  } else {
    out.value = current;
    out.accepted = false;
  }
  return out;
}

}  // namespace khaos
