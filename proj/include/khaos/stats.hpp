#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace khaos {

/// Standard normal CDF, accurate in both tails (erfc based).
double normal_cdf(double x);

/// Standard normal quantile function (Wichura's AS241, double precision).
/// Requires 0 < p < 1.
double normal_quantile(double p);

/// Standard normal log density.
inline double normal_log_pdf(double x) {
  return -0.5 * x * x - 0.9189385332046727417803297364056;  // log sqrt(2*pi)
}

/// log C(n, k) via lgamma; exact to double rounding for the sizes used here.
double log_binomial(int n, int k);

/// Numerically stable log(sum(exp(v))).
double log_sum_exp(std::span<const double> v);

/// Log density of Inverse-Gamma(shape a, scale b): b^a/Gamma(a) x^{-a-1} e^{-b/x}.
double inv_gamma_log_pdf(double x, double a, double b);

/// Sample mean and (unbiased) variance.
struct MeanVar {
  double mean = 0.0;
  double var = 0.0;
};
MeanVar mean_var(std::span<const double> v);

/// Empirical quantile with linear interpolation on a *sorted* vector.
double sorted_quantile(std::span<const double> sorted, double p);

}  // namespace khaos
