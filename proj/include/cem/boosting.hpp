#pragma once

#include <cstdint>
#include <vector>

#include "cem/tree.hpp"

namespace cem {

// Gradient-boosted regression trees under squared-error loss: start at the
// target mean, then fit each depth-limited CART to the current residuals and
// add it scaled by the learning rate.
class GbdtModel : public Regressor {
 public:
  GbdtModel() = default;
  GbdtModel(double init, double learning_rate, std::vector<CartModel> trees,
            std::size_t features, std::vector<double> train_mse);

  Family family() const override { return Family::gbdt; }
  std::size_t feature_count() const override { return features_; }
  std::vector<double> predict(const Matrix& X) const override;

  double init() const { return init_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<CartModel>& trees() const { return trees_; }
  // Training MSE after the initial fit and after each boosting round.
  const std::vector<double>& train_mse_trace() const { return train_mse_; }

 private:
  double init_ = 0.0;
  double learning_rate_ = 0.1;
  std::vector<CartModel> trees_;
  std::size_t features_ = 0;
  std::vector<double> train_mse_;
};

struct BoostParams {
  std::size_t trees = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
  std::size_t features_per_split = 0;
  std::size_t min_sample_split = 2;
  double lambda = 1.0;  // xgb leaf regularization
  double gamma = 0.0;   // xgb split penalty
  std::uint64_t seed = 0;
};

GbdtModel fit_gbdt(const Matrix& X, const std::vector<double>& y, const BoostParams& p);
GbdtModel fit_gbdt(const Matrix& X, const std::vector<double>& y, const HyperParams& hp,
                   std::uint64_t seed);

// Second-order boosting tree: per-leaf weight -G/(H + lambda) and the
// half-gain split rule with the gamma penalty; non-positive gains stop the
// split.
struct XgbNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaf output
};

struct XgbTree {
  std::vector<XgbNode> nodes;
  double output(std::span<const double> row) const;
};

class XgbModel : public Regressor {
 public:
  XgbModel() = default;
  XgbModel(double init, double learning_rate, std::vector<XgbTree> trees,
           std::size_t features, std::vector<double> train_mse);

  Family family() const override { return Family::xgb; }
  std::size_t feature_count() const override { return features_; }
  std::vector<double> predict(const Matrix& X) const override;

  double init() const { return init_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<XgbTree>& trees() const { return trees_; }
  const std::vector<double>& train_mse_trace() const { return train_mse_; }

 private:
  double init_ = 0.0;
  double learning_rate_ = 0.1;
  std::vector<XgbTree> trees_;
  std::size_t features_ = 0;
  std::vector<double> train_mse_;
};

XgbModel fit_xgb(const Matrix& X, const std::vector<double>& y, const BoostParams& p);
XgbModel fit_xgb(const Matrix& X, const std::vector<double>& y, const HyperParams& hp,
                 std::uint64_t seed);

BoostParams boost_params_from(const HyperParams& hp, std::uint64_t seed);

}  // namespace cem
