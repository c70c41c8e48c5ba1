#include "khaos/legendre.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace khaos {

double legendre_shifted(int degree, double x) {
  if (degree < 0) throw std::invalid_argument("legendre_shifted: degree < 0");
  if (degree > kMaxLegendreDegree)
    throw std::invalid_argument("legendre_shifted: degree " +
                                std::to_string(degree) + " exceeds maximum " +
                                std::to_string(kMaxLegendreDegree));
  const double t = 2.0 * x - 1.0;
  if (degree == 0) return 1.0;
  double pm1 = 1.0;  // P_0
  double p = t;      // P_1
  for (int k = 1; k < degree; ++k) {
    const double pp1 = ((2.0 * k + 1.0) * t * p - k * pm1) / (k + 1.0);
    pm1 = p;
    p = pp1;
  }
  return std::sqrt(2.0 * degree + 1.0) * p;
}

double evaluate_basis(const MultiIndex& mi, const Eigen::VectorXd& x) {
  if (mi.dim() != static_cast<int>(x.size()))
    throw std::invalid_argument("evaluate_basis: dimension mismatch");
  double out = 1.0;
  for (int j = 0; j < mi.dim(); ++j) {
    if (mi[j] > 0) out *= legendre_shifted(mi[j], x[j]);
  }
  return out;
}

LegendreTable::LegendreTable(const Eigen::MatrixXd& X, int d_max)
    : n_(static_cast<int>(X.rows())),
      p_(static_cast<int>(X.cols())),
      d_max_(d_max) {
  if (d_max < 0 || d_max > kMaxLegendreDegree)
    throw std::invalid_argument("LegendreTable: bad maximum degree");
  values_.reserve(static_cast<std::size_t>(p_));
  for (int j = 0; j < p_; ++j) {
    Eigen::MatrixXd tab(n_, d_max_ + 1);
    tab.col(0).setOnes();
    if (d_max_ >= 1) {
      const Eigen::ArrayXd t = 2.0 * X.col(j).array() - 1.0;
      Eigen::ArrayXd pm1 = Eigen::ArrayXd::Ones(n_);
      Eigen::ArrayXd p = t;
      tab.col(1) = std::sqrt(3.0) * p;
      for (int k = 1; k < d_max_; ++k) {
        const Eigen::ArrayXd pp1 = ((2.0 * k + 1.0) * t * p - k * pm1) / (k + 1.0);
        pm1 = p;
        p = pp1;
        tab.col(k + 1) = std::sqrt(2.0 * (k + 1.0) + 1.0) * p;
      }
    }
    values_.push_back(std::move(tab));
  }
}

Eigen::VectorXd LegendreTable::column(const MultiIndex& mi) const {
  Eigen::VectorXd out(n_);
  column_into(mi, out);
  return out;
}

void LegendreTable::column_into(const MultiIndex& mi,
                                Eigen::Ref<Eigen::VectorXd> out) const {
  if (mi.dim() != p_)
    throw std::invalid_argument("LegendreTable: dimension mismatch");
  out.setOnes();
  for (int j = 0; j < p_; ++j) {
    const int d = mi[j];
    if (d == 0) continue;
    if (d > d_max_)
      throw std::invalid_argument("LegendreTable: degree exceeds table");
    out.array() *= values_[static_cast<std::size_t>(j)].col(d).array();
  }
}

}  // namespace khaos
