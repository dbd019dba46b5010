#pragma once

#include <cstdint>
#include <vector>

#include "cem/learners.hpp"
#include "cem/matrix.hpp"

namespace cem {

struct NnParams {
  std::size_t neurons = 20;
  double learning_rate = 0.005;
  double weight_decay = 0.001;
  std::size_t epochs = 500;
  std::size_t batch = 256;
};

// Single hidden layer of tanh units with a linear output, trained by
// mini-batch gradient descent on MSE plus an L2 weight penalty (biases
// excluded). The target is standardized internally for optimization and
// predictions are mapped back, so the reported scale is untouched.
class NnModel : public Regressor {
 public:
  NnModel() = default;
  NnModel(Matrix w1, std::vector<double> b1, std::vector<double> w2, double b2,
          double y_mean, double y_scale, NnParams params);

  Family family() const override { return Family::nn; }
  std::size_t feature_count() const override { return w1_.cols(); }
  std::vector<double> predict(const Matrix& X) const override;

  // Raw network output before the target de-standardization.
  double raw_output(std::span<const double> row) const;

  const Matrix& hidden_weights() const { return w1_; }
  const std::vector<double>& hidden_bias() const { return b1_; }
  const std::vector<double>& output_weights() const { return w2_; }
  double output_bias() const { return b2_; }
  double target_mean() const { return y_mean_; }
  double target_scale() const { return y_scale_; }
  const NnParams& params() const { return params_; }

 private:
  Matrix w1_;  // neurons x features
  std::vector<double> b1_;
  std::vector<double> w2_;  // neurons
  double b2_ = 0.0;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  NnParams params_;
};

NnModel fit_nn(const Matrix& X, const std::vector<double>& y, const NnParams& p,
               std::uint64_t seed);
NnModel fit_nn(const Matrix& X, const std::vector<double>& y, const HyperParams& hp,
               std::uint64_t seed);

// Full-batch loss (MSE + 0.5 * weight_decay * ||W||^2) and its gradient with
// respect to the flattened parameter vector [w1, b1, w2, b2]; shared by the
// trainer and the finite-difference gradient check.
double nn_loss_and_grad(const Matrix& X, const std::vector<double>& y,
                        std::span<const double> params, std::size_t neurons,
                        double weight_decay, std::vector<double>& grad);

std::size_t nn_param_count(std::size_t features, std::size_t neurons);

}  // namespace cem
