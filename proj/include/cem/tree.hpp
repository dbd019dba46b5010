#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cem/learners.hpp"
#include "cem/matrix.hpp"

namespace cem {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;   // leaf prediction (mean of its samples)
  double weight = 0.0;  // total sample weight reaching the node
  double sse = 0.0;     // weighted squared error around the node mean
};

struct CartParams {
  std::size_t max_depth = static_cast<std::size_t>(-1);
  std::size_t min_sample_split = 2;
  std::size_t features_per_split = 0;  // 0 = use all features
  double ccp_alpha = 0.0;
  std::uint64_t seed = 0;  // feature-subsampling stream

  // Caller-owned per-feature ascending sort orders over all rows; boosting
  // shares one presort across rounds. Ignored for weighted fits.
  const std::vector<std::vector<std::size_t>>* presorted = nullptr;
};

// Binary regression tree: exhaustive variance-reduction splits at value
// midpoints, mean-leaf predictions, optional per-split feature subsampling
// and weakest-link cost-complexity pruning.
class CartModel : public Regressor {
 public:
  CartModel() = default;
  CartModel(std::vector<TreeNode> nodes, std::size_t features);

  Family family() const override { return Family::cart; }
  std::size_t feature_count() const override { return features_; }
  std::vector<double> predict(const Matrix& X) const override;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t leaf_count() const;
  // Leaf index for one row; exposed for the boosting update.
  std::size_t leaf_for(std::span<const double> row) const;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t features_ = 0;
};

CartModel fit_cart(const Matrix& X, const std::vector<double>& y, const CartParams& p);

// Weighted variant used by the forest's bootstrap resampling. weights[i] is
// the multiplicity of row i; zero-weight rows are ignored entirely.
CartModel fit_cart_weighted(const Matrix& X, const std::vector<double>& y,
                            const std::vector<double>& weights, const CartParams& p);

// Translates the spec-facing hyperparameters (features, min_sample_split,
// ccp, depth) into CartParams.
CartParams cart_params_from(const HyperParams& hp, std::uint64_t seed);

}  // namespace cem
