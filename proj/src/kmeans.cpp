#include "cem/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cem/error.hpp"
#include "cem/rng.hpp"

namespace cem {

std::size_t KMeansModel::assign(std::span<const double> point) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d = squared_distance(point, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

namespace {

Matrix kmeanspp_init(const Matrix& X, std::size_t k, Rng& rng) {
  const std::size_t n = X.rows(), d = X.cols();
  Matrix centers(k, d);
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  for (std::size_t j = 0; j < d; ++j) centers(0, j) = X(first, j);

  std::vector<double> dist2(n);
  for (std::size_t i = 0; i < n; ++i)
    dist2[i] = squared_distance(X.row(i), centers.row(0));

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : dist2) total += v;
    std::size_t pick;
    if (total <= 0.0) {
      pick = static_cast<std::size_t>(rng.below(n));  // all remaining mass is zero
    } else {
      const double target = rng.uniform() * total;
      double cum = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += dist2[i];
        if (target < cum) {
          pick = i;
          break;
        }
      }
    }
    for (std::size_t j = 0; j < d; ++j) centers(c, j) = X(pick, j);
    for (std::size_t i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i], squared_distance(X.row(i), centers.row(c)));
  }
  return centers;
}

}  // namespace

KMeansModel fit_kmeans(const Matrix& X, std::size_t k, std::uint64_t seed,
                       std::size_t max_iter, double tol) {
  const std::size_t n = X.rows(), d = X.cols();
  if (k < 1) throw InvalidArgumentError("k must be >= 1");
  if (k > n)
    throw InvalidArgumentError("k = " + std::to_string(k) + " exceeds " +
                               std::to_string(n) + " rows");

  Rng rng(hash_seed(seed, 0x4b4d45414e53ULL));
  KMeansModel model;
  model.k = k;
  model.centroids = kmeanspp_init(X, k, rng);
  model.assignments.assign(n, 0);

  std::vector<double> point_dist2(n, 0.0);
  std::vector<double> sums(k * d);
  std::vector<std::size_t> counts(k);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // Assignment step; inertia is measured against the current centroids.
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = squared_distance(X.row(i), model.centroids.row(c));
        if (dd < best_d) {
          best_d = dd;
          best = c;
        }
      }
      model.assignments[i] = static_cast<int>(best);
      point_dist2[i] = best_d;
      inertia += best_d;
    }

    // Re-seed emptied clusters at the farthest point before the update.
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[model.assignments[i]];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[model.assignments[i]] <= 1) continue;  // keep donors non-empty
        if (point_dist2[i] > far_d) {
          far_d = point_dist2[i];
          far = i;
        }
      }
      --counts[model.assignments[far]];
      model.assignments[far] = static_cast<int>(c);
      counts[c] = 1;
      inertia -= far_d;
      point_dist2[far] = 0.0;
    }
    model.inertia_trace.push_back(inertia);
    model.inertia = inertia;
    model.iterations = iter + 1;

    // Update step.
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = static_cast<std::size_t>(model.assignments[i]);
      const auto row = X.row(i);
      for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += row[j];
    }
    double max_shift2 = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double shift2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double nc = sums[c * d + j] / static_cast<double>(counts[c]);
        const double delta = nc - model.centroids(c, j);
        shift2 += delta * delta;
        model.centroids(c, j) = nc;
      }
      max_shift2 = std::max(max_shift2, shift2);
    }
    if (std::sqrt(max_shift2) < tol) {
      model.converged = true;
      break;
    }
  }

  // Final assignment and inertia against the final centroids.
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t best = model.assign(X.row(i));
    model.assignments[i] = static_cast<int>(best);
    inertia += squared_distance(X.row(i), model.centroids.row(best));
  }
  model.inertia = inertia;
  return model;
}

}  // namespace cem
