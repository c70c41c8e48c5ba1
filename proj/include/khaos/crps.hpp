#pragma once

#include <Eigen/Core>
#include <span>

namespace khaos {

/// Sample-based continuous ranked probability score,
///   CRPS = (1/m) sum_i |Y_i - y| - 1/(2 m^2) sum_ij |Y_i - Y_j|,
/// computed in O(m log m) after sorting. Lower is better; requires m >= 2.
double crps_from_samples(std::span<const double> samples, double y_true);

/// Convenience overload for an Eigen column of predictive samples.
double crps_from_samples(const Eigen::VectorXd& samples, double y_true);

/// Mean CRPS of per-point predictive samples (rows of `samples` are draws,
/// columns are points) against the observed vector.
double mean_crps(const Eigen::MatrixXd& samples, const Eigen::VectorXd& y_true);

}  // namespace khaos
