#pragma once

#include <Eigen/Core>

#include "khaos/rng.hpp"

namespace khaos {

/// Plain Latin hypercube: each column's values occupy distinct strata
/// [k/n, (k+1)/n), jittered uniformly within the stratum.
Eigen::MatrixXd latin_hypercube(int n, int p, Rng& rng);

/// Minimum pairwise Euclidean distance of the rows.
double min_pairwise_distance(const Eigen::MatrixXd& design);

/// Maximin-improved Latin hypercube: random pairwise swaps within columns,
/// keeping any swap that raises the minimum inter-point distance; best of
/// n_restarts fresh starts is returned. Requires n >= 2.
Eigen::MatrixXd maximin_lhs(int n, int p, Rng& rng, int n_restarts = 5);

}  // namespace khaos
