#pragma once

#include <cstdint>
#include <vector>

#include "cem/dataset.hpp"
#include "cem/matrix.hpp"

namespace cem {

// Desk-scale surrogate for the OD dataset: planted feature clusters with
// cluster-specific log-linear demand regimes, plus optional airport/downtown
// pseudo-tract rows that only knowledge rules can separate.
struct SyntheticSpec {
  std::size_t n_rows = 5000;
  std::size_t n_features = 8;
  std::size_t n_clusters = 3;
  double separation = 4.0;       // distance scale between cluster centers
  double noise = 1.0;            // 0 = exact rates; 1 = Poisson counts
  double knowledge_fraction = 0.0;
  std::uint64_t seed = 1;
  double coef_scale = 0.35;
  double intercept = 4.0;
  bool opposed_signs = true;     // adjacent clusters flip every coefficient

  // Explicit per-regime coefficient vectors (n_clusters + 2 rows when
  // knowledge regimes are wanted, n_clusters rows otherwise). Empty = derive
  // magnitudes and signs from the seed.
  std::vector<std::vector<double>> coefficients;
  std::vector<double> intercepts;
};

struct SyntheticData {
  ODPairDataset data;
  // Regime per row: 0..n_clusters-1 planted clusters, then n_clusters for
  // airport rows and n_clusters+1 for downtown rows.
  std::vector<int> regime;
  Matrix coefficients;  // (n_clusters + 2) x n_features
  std::vector<double> intercepts;
  std::vector<std::string> airport_tracts{"AIR_1", "AIR_2"};
  std::vector<std::string> downtown_tracts{"DTN_1", "DTN_2", "DTN_3"};
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace cem
