#pragma once

#include <cstdint>
#include <vector>

#include "cem/tree.hpp"

namespace cem {

// Bagged CARTs: bootstrap row sampling plus per-split feature bagging;
// prediction is the plain average over trees.
class ForestModel : public Regressor {
 public:
  ForestModel() = default;
  ForestModel(std::vector<CartModel> trees, std::size_t features);

  Family family() const override { return Family::random_forest; }
  std::size_t feature_count() const override { return features_; }
  std::vector<double> predict(const Matrix& X) const override;

  const std::vector<CartModel>& trees() const { return trees_; }

 private:
  std::vector<CartModel> trees_;
  std::size_t features_ = 0;
};

struct ForestParams {
  std::size_t trees = 100;
  std::size_t features_per_split = 0;
  std::size_t min_sample_split = 2;
  std::size_t max_depth = static_cast<std::size_t>(-1);
  bool bootstrap = true;
  std::size_t threads = 1;
};

ForestModel fit_random_forest(const Matrix& X, const std::vector<double>& y,
                              const ForestParams& p, std::uint64_t seed);

ForestModel fit_random_forest(const Matrix& X, const std::vector<double>& y,
                              const HyperParams& hp, std::uint64_t seed);

}  // namespace cem
