#include "khaos/crps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace khaos {

double crps_from_samples(std::span<const double> samples, double y_true) {
  const std::size_t m = samples.size();
  if (m < 2) throw std::invalid_argument("crps_from_samples: need m >= 2");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  double abs_err = 0.0;
  double pair_sum = 0.0;  // sum_ij |Y_i - Y_j| via the sorted identity
  for (std::size_t i = 0; i < m; ++i) {
    abs_err += std::abs(sorted[i] - y_true);
    pair_sum += sorted[i] * (2.0 * static_cast<double>(i + 1) - 1.0 -
                             static_cast<double>(m));
  }
  pair_sum *= 2.0;
  const double dm = static_cast<double>(m);
  return abs_err / dm - pair_sum / (2.0 * dm * dm);
}

double crps_from_samples(const Eigen::VectorXd& samples, double y_true) {
  return crps_from_samples(
      std::span<const double>(samples.data(),
                              static_cast<std::size_t>(samples.size())),
      y_true);
}

double mean_crps(const Eigen::MatrixXd& samples,
                 const Eigen::VectorXd& y_true) {
  if (samples.cols() != y_true.size())
    throw std::invalid_argument("mean_crps: size mismatch");
  double total = 0.0;
  std::vector<double> col(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    for (Eigen::Index i = 0; i < samples.rows(); ++i)
      col[static_cast<std::size_t>(i)] = samples(i, j);
    total += crps_from_samples(col, y_true[j]);
  }
  return total / static_cast<double>(samples.cols());
}

}  // namespace khaos
