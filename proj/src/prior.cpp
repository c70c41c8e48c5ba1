#include "khaos/prior.hpp"

#include <cmath>
#include <stdexcept>

namespace khaos {

std::string to_string(PriorFamily family) {
  switch (family) {
    case PriorFamily::kRidge: return "ridge";
    case PriorFamily::kGPrior: return "gprior";
    case PriorFamily::kModifiedGPrior: return "modified-gprior";
  }
  return "unknown";
}

PriorFamily prior_family_from_string(const std::string& name) {
  if (name == "ridge") return PriorFamily::kRidge;
  if (name == "gprior") return PriorFamily::kGPrior;
  if (name == "modified-gprior") return PriorFamily::kModifiedGPrior;
  throw std::invalid_argument("unknown prior family: " + name);
}

void PriorSpec::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0))
      throw std::invalid_argument(std::string("PriorSpec: ") + name +
                                  " must be positive");
  };
  positive(a_M, "a_M");
  positive(b_M, "b_M");
  positive(a_sigma, "a_sigma");
  positive(b_sigma, "b_sigma");
  positive(a_g, "a_g");
  positive(b_g, "b_g");
  positive(tau2, "tau2");
  if (zeta < 0.0) throw std::invalid_argument("PriorSpec: zeta must be >= 0");
  if (d_max < 1) throw std::invalid_argument("PriorSpec: d_max must be >= 1");
  if (q_max < 1) throw std::invalid_argument("PriorSpec: q_max must be >= 1");
  if (s_q < 0.0 || s_d < 0.0)
    throw std::invalid_argument("PriorSpec: decay exponents must be >= 0");
  if (fixed_sigma2 && !(*fixed_sigma2 > 0.0))
    throw std::invalid_argument("PriorSpec: fixed_sigma2 must be positive");
}

double shrink_weight(const MultiIndex& mi, double zeta) {
  const double q = mi.order();
  const double d = mi.degree();
  const double denom = 1.0 + q * (d + q - 2.0);
  return std::pow(1.0 / denom, 0.5 * zeta);
}

Eigen::VectorXd shrink_weights(const std::vector<MultiIndex>& indices,
                               double zeta) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t m = 0; m < indices.size(); ++m) {
    g[static_cast<Eigen::Index>(m)] = shrink_weight(indices[m], zeta);
  }
  return g;
}

PriorCovInverse PriorCovInverse::ridge(double tau2) {
  if (!(tau2 > 0.0)) throw std::invalid_argument("ridge: tau2 must be > 0");
  PriorCovInverse out;
  out.mode_ = Mode::kRidge;
  out.tau2_ = tau2;
  return out;
}

PriorCovInverse PriorCovInverse::gprior(Eigen::VectorXd g, double g0sq) {
  if (!(g0sq > 0.0)) throw std::invalid_argument("gprior: g0sq must be > 0");
  if (g.size() == 0 || (g.array() <= 0.0).any())
    throw std::invalid_argument("gprior: weights must be positive");
  PriorCovInverse out;
  out.mode_ = Mode::kGPriorFull;
  out.g0sq_ = g0sq;
  out.g_ = std::move(g);
  return out;
}

PriorCovInverse PriorCovInverse::gprior_flat_intercept(Eigen::VectorXd g,
                                                       double g0sq,
                                                       double tau0sq) {
  PriorCovInverse out = gprior(std::move(g), g0sq);
  if (!(tau0sq > 0.0))
    throw std::invalid_argument("gprior_flat_intercept: tau0sq must be > 0");
  out.mode_ = Mode::kGPriorFlatIntercept;
  out.tau2_ = tau0sq;
  return out;
}

Eigen::MatrixXd PriorCovInverse::posterior_precision(
    const Eigen::MatrixXd& gram) const {
  if (mode_ == Mode::kRidge) {
    Eigen::MatrixXd a = gram;
    a.diagonal().array() += 1.0 / tau2_;
    return a;
  }
  if (gram.rows() != g_.size())
    throw std::invalid_argument("posterior_precision: size mismatch");
  if (mode_ == Mode::kGPriorFull) return g_factor().cwiseProduct(gram);
  // Flat intercept: scale only the non-intercept block.
  Eigen::MatrixXd a = gram;
  const Eigen::Index m1 = gram.rows();
  for (Eigen::Index i = 1; i < m1; ++i) {
    for (Eigen::Index j = 1; j < m1; ++j) {
      const double s = g0sq_ * g_[i] * g_[j];
      a(i, j) *= (s + 1.0) / s;
    }
  }
  a(0, 0) += 1.0 / tau2_;
  return a;
}

Eigen::MatrixXd PriorCovInverse::g_factor() const {
  if (mode_ == Mode::kRidge)
    throw std::logic_error("g_factor: ridge prior has no G structure");
  const Eigen::Index m1 = g_.size();
  Eigen::MatrixXd gf(m1, m1);
  for (Eigen::Index i = 0; i < m1; ++i) {
    for (Eigen::Index j = 0; j < m1; ++j) {
      const double s = g0sq_ * g_[i] * g_[j];
      gf(i, j) = (s + 1.0) / s;
    }
  }
  return gf;
}

double PriorCovInverse::log_det_S0(int m1, double log_det_gram) const {
  if (mode_ == Mode::kRidge) return m1 * std::log(tau2_);
  if (mode_ == Mode::kGPriorFull) {
    double out = m1 * std::log(g0sq_) - log_det_gram;
    for (Eigen::Index i = 0; i < g_.size(); ++i) out += 2.0 * std::log(g_[i]);
    return out;
  }
  // Flat intercept: |S0| = tau0sq * |g0^2 D(g~) (gram block)^-1 D(g~)|,
  // with log_det_gram the non-intercept block determinant.
  double out = std::log(tau2_) + (m1 - 1) * std::log(g0sq_) - log_det_gram;
  for (Eigen::Index i = 1; i < g_.size(); ++i) out += 2.0 * std::log(g_[i]);
  return out;
}

Eigen::MatrixXd PriorCovInverse::s0_inverse(const Eigen::MatrixXd& gram) const {
  const Eigen::Index m1 = gram.rows();
  if (mode_ == Mode::kRidge) {
    return Eigen::MatrixXd::Identity(m1, m1) / tau2_;
  }
  if (mode_ == Mode::kGPriorFull) {
    // S0^-1 = g0^-2 D(g)^-1 Psi'Psi D(g)^-1
    Eigen::MatrixXd out = gram;
    for (Eigen::Index i = 0; i < m1; ++i) {
      for (Eigen::Index j = 0; j < m1; ++j) {
        out(i, j) /= g0sq_ * g_[i] * g_[j];
      }
    }
    return out;
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m1, m1);
  out(0, 0) = 1.0 / tau2_;
  for (Eigen::Index i = 1; i < m1; ++i) {
    for (Eigen::Index j = 1; j < m1; ++j) {
      out(i, j) = gram(i, j) / (g0sq_ * g_[i] * g_[j]);
    }
  }
  return out;
}

}  // namespace khaos
