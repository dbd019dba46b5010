#include "cem/metrics.hpp"

#include <cmath>
#include <string>

#include "cem/error.hpp"

namespace cem {

Metrics compute_metrics(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size())
    throw SchemaError("metrics need equal-length vectors, got " +
                      std::to_string(y_true.size()) + " and " +
                      std::to_string(y_pred.size()));
  if (y_true.empty()) throw EmptyInputError("metrics of empty vectors");

  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double e = y_pred[i] - y_true[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  const double n = static_cast<double>(y_true.size());
  Metrics m;
  m.mae = abs_sum / n;
  m.mse = sq_sum / n;
  m.rmse = std::sqrt(m.mse);
  return m;
}

}  // namespace cem
