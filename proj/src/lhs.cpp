#include "khaos/lhs.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace khaos {

Eigen::MatrixXd latin_hypercube(int n, int p, Rng& rng) {
  if (n < 1 || p < 1) throw std::invalid_argument("latin_hypercube: bad size");
  Eigen::MatrixXd design(n, p);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
      const int k = rng.uniform_int(0, i);
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(k)]);
    }
    for (int i = 0; i < n; ++i) {
      design(i, j) =
          (static_cast<double>(perm[static_cast<std::size_t>(i)]) +
           rng.uniform()) /
          static_cast<double>(n);
    }
  }
  return design;
}

double min_pairwise_distance(const Eigen::MatrixXd& design) {
  const int n = static_cast<int>(design.rows());
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (design.row(i) - design.row(j)).squaredNorm();
      best = std::min(best, d2);
    }
  }
  return std::sqrt(best);
}

Eigen::MatrixXd maximin_lhs(int n, int p, Rng& rng, int n_restarts) {
  if (n < 2) throw std::invalid_argument("maximin_lhs: need n >= 2");
  if (n_restarts < 1) n_restarts = 1;

  Eigen::MatrixXd best_design;
  double best_min = -1.0;

  // Full squared-distance matrix kept in sync; a within-column swap of rows
  // (r1, r2) changes only the pairs touching those rows, and only through
  // the swapped coordinate, so each trial costs O(n).
  Eigen::MatrixXd dist2(n, n);

  for (int restart = 0; restart < n_restarts; ++restart) {
    Eigen::MatrixXd design = latin_hypercube(n, p, rng);
    for (int i = 0; i < n; ++i) {
      dist2(i, i) = std::numeric_limits<double>::infinity();
      for (int j = i + 1; j < n; ++j) {
        const double d2 = (design.row(i) - design.row(j)).squaredNorm();
        dist2(i, j) = d2;
        dist2(j, i) = d2;
      }
    }

    const long max_trials = 50L * n;
    const long patience = 5L * n;
    long since_improvement = 0;
    std::vector<double> new_r1(static_cast<std::size_t>(n));
    std::vector<double> new_r2(static_cast<std::size_t>(n));
    for (long trial = 0; trial < max_trials && since_improvement < patience;
         ++trial) {
      const int col = rng.uniform_int(0, p - 1);
      const int r1 = rng.uniform_int(0, n - 1);
      int r2 = rng.uniform_int(0, n - 2);
      if (r2 >= r1) ++r2;
      const double v1 = design(r1, col);
      const double v2 = design(r2, col);

      // Accept when the bottleneck among pairs touching r1/r2 improves;
      // all other pairs are untouched, so the global minimum cannot drop.
      double before = std::numeric_limits<double>::infinity();
      double after = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (i == r1 || i == r2) continue;
        const double xi = design(i, col);
        const double a1 = dist2(i, r1) - (xi - v1) * (xi - v1) +
                          (xi - v2) * (xi - v2);
        const double a2 = dist2(i, r2) - (xi - v2) * (xi - v2) +
                          (xi - v1) * (xi - v1);
        new_r1[static_cast<std::size_t>(i)] = a1;
        new_r2[static_cast<std::size_t>(i)] = a2;
        before = std::min({before, dist2(i, r1), dist2(i, r2)});
        after = std::min({after, a1, a2});
      }
      // The (r1, r2) pair itself keeps its distance under the swap.
      before = std::min(before, dist2(r1, r2));
      after = std::min(after, dist2(r1, r2));

      if (after > before) {
        design(r1, col) = v2;
        design(r2, col) = v1;
        for (int i = 0; i < n; ++i) {
          if (i == r1 || i == r2) continue;
          dist2(i, r1) = new_r1[static_cast<std::size_t>(i)];
          dist2(r1, i) = new_r1[static_cast<std::size_t>(i)];
          dist2(i, r2) = new_r2[static_cast<std::size_t>(i)];
          dist2(r2, i) = new_r2[static_cast<std::size_t>(i)];
        }
        since_improvement = 0;
      } else {
        ++since_improvement;
      }
    }

    double current_min2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        current_min2 = std::min(current_min2, dist2(i, j));
    const double current_min = std::sqrt(current_min2);
    if (current_min > best_min) {
      best_min = current_min;
      best_design = std::move(design);
    }
  }
  return best_design;
}

}  // namespace khaos
