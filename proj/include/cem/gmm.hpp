#pragma once

#include <cstdint>
#include <vector>

#include "cem/matrix.hpp"

namespace cem {

// Diagonal-covariance Gaussian mixture fitted by EM. Hard assignment is the
// argmax posterior responsibility (lowest index on ties).
struct GmmModel {
  std::size_t k = 0;
  std::vector<double> weights;  // sum to 1
  Matrix means;                 // k x d
  Matrix variances;             // k x d, floored at kVarianceFloor
  double log_likelihood = 0.0;
  std::vector<int> assignments;
  std::vector<double> ll_trace;  // one entry per EM iteration
  std::size_t iterations = 0;
  bool converged = false;

  static constexpr double kVarianceFloor = 1e-6;

  std::size_t assign(std::span<const double> point) const;
  // Unnormalized log posterior of each component for a point.
  void component_log_scores(std::span<const double> point,
                            std::vector<double>& out) const;
};

// Stops when the log-likelihood gain per iteration drops below tol.
// Initialization: k-means++ draws for the means, global per-column variances,
// uniform weights.
GmmModel fit_gmm(const Matrix& X, std::size_t k, std::uint64_t seed,
                 std::size_t max_iter = 100, double tol = 1e-6);

}  // namespace cem
