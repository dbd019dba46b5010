#pragma once

#include <span>

#include "cem/matrix.hpp"

namespace cem {

// Davies-Bouldin index: (1/K) sum_i max_{j!=i} (S_i + S_j) / M_ij, where S_i
// is the mean Euclidean distance of cluster i's points to their centroid and
// M_ij the distance between centroids i and j. Lower is better. Throws
// InvalidArgumentError when k < 2 or any cluster is empty; coincident
// centroids yield +infinity, which callers treat as an invalid run.
double davies_bouldin(const Matrix& X, std::span<const int> assignments, std::size_t k);

}  // namespace cem
