#pragma once

#include <cstdint>
#include <vector>

#include "cem/matrix.hpp"

namespace cem {

struct KMeansModel {
  std::size_t k = 0;
  Matrix centroids;  // k x d
  double inertia = 0.0;
  std::vector<int> assignments;        // training rows
  std::vector<double> inertia_trace;   // one entry per Lloyd iteration
  std::size_t iterations = 0;
  bool converged = false;

  // Nearest centroid; ties break to the lowest index.
  std::size_t assign(std::span<const double> point) const;
};

// Lloyd's algorithm with k-means++ seeding. Converges when the largest
// centroid shift drops below tol. An emptied cluster is re-seeded at the
// point farthest from its assigned centroid.
KMeansModel fit_kmeans(const Matrix& X, std::size_t k, std::uint64_t seed,
                       std::size_t max_iter = 100, double tol = 1e-6);

}  // namespace cem
