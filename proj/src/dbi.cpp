#include "cem/dbi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cem/error.hpp"

namespace cem {

double davies_bouldin(const Matrix& X, std::span<const int> assignments,
                      std::size_t k) {
  const std::size_t n = X.rows(), d = X.cols();
  if (k < 2) throw InvalidArgumentError("davies_bouldin needs at least 2 clusters");
  if (assignments.size() != n)
    throw InvalidArgumentError("assignment length does not match row count");

  Matrix centroids(k, d);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int a = assignments[i];
    if (a < 0 || static_cast<std::size_t>(a) >= k)
      throw InvalidArgumentError("assignment out of range at row " + std::to_string(i));
    ++counts[a];
    for (std::size_t j = 0; j < d; ++j) centroids(a, j) += X(i, j);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0)
      throw InvalidArgumentError("cluster " + std::to_string(c) + " is empty");
    for (std::size_t j = 0; j < d; ++j) centroids(c, j) /= static_cast<double>(counts[c]);
  }

  std::vector<double> scatter(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = static_cast<std::size_t>(assignments[i]);
    scatter[a] += std::sqrt(squared_distance(X.row(i), centroids.row(a)));
  }
  for (std::size_t c = 0; c < k; ++c) scatter[c] /= static_cast<double>(counts[c]);

  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const double m = std::sqrt(squared_distance(centroids.row(i), centroids.row(j)));
      const double ratio = m > 0.0 ? (scatter[i] + scatter[j]) / m
                                   : std::numeric_limits<double>::infinity();
      worst = std::max(worst, ratio);
    }
    total += worst;
  }
  return total / static_cast<double>(k);
}

}  // namespace cem
