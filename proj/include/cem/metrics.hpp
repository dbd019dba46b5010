#pragma once

#include <span>

namespace cem {

struct Metrics {
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
};

// MAE = (1/N) sum |yhat - y|, MSE = (1/N) sum (yhat - y)^2, RMSE = sqrt(MSE).
Metrics compute_metrics(std::span<const double> y_true, std::span<const double> y_pred);

}  // namespace cem
