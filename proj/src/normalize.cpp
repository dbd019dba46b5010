#include "cem/normalize.hpp"

#include <algorithm>

#include "cem/error.hpp"

namespace cem {

namespace {

std::vector<std::size_t> all_columns(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

NormalizationParams NormalizationParams::fit(const Matrix& features,
                                             std::span<const std::size_t> columns) {
  if (features.rows() == 0) throw EmptyInputError("fit_normalizer on empty dataset");
  std::vector<std::size_t> cols(columns.begin(), columns.end());
  if (cols.empty()) cols = all_columns(features.cols());

  NormalizationParams p;
  p.scales_.assign(features.cols(), std::nullopt);
  for (std::size_t c : cols) {
    if (c >= features.cols())
      throw SchemaError("normalizer column index " + std::to_string(c) + " out of range");
    double lo = features(0, c), hi = features(0, c);
    for (std::size_t r = 1; r < features.rows(); ++r) {
      lo = std::min(lo, features(r, c));
      hi = std::max(hi, features(r, c));
    }
    p.scales_[c] = ColumnScale{lo, hi, lo == hi};
  }
  return p;
}

NormalizationParams NormalizationParams::fit(const ODPairDataset& data,
                                             std::span<const std::size_t> columns) {
  return fit(data.feature_matrix(), columns);
}

const ColumnScale& NormalizationParams::scale(std::size_t feature_index) const {
  if (!covers(feature_index))
    throw SchemaError("normalizer does not cover feature column " +
                      std::to_string(feature_index));
  return *scales_[feature_index];
}

double NormalizationParams::normalize_value(std::size_t feature_index, double x) const {
  const ColumnScale& s = scale(feature_index);
  if (s.constant) return 0.0;
  return std::clamp((x - s.min) / (s.max - s.min), 0.0, 1.0);
}

double NormalizationParams::denormalize_value(std::size_t feature_index, double x) const {
  const ColumnScale& s = scale(feature_index);
  if (s.constant) return s.min;
  return s.min + x * (s.max - s.min);
}

void NormalizationParams::apply_in_place(std::span<double> row_values) const {
  if (row_values.size() != scales_.size())
    throw SchemaError("normalizer fitted on " + std::to_string(scales_.size()) +
                      " columns, row has " + std::to_string(row_values.size()));
  for (std::size_t c = 0; c < scales_.size(); ++c)
    if (scales_[c]) row_values[c] = normalize_value(c, row_values[c]);
}

Matrix NormalizationParams::apply(const Matrix& features) const {
  if (features.cols() != scales_.size())
    throw SchemaError("normalizer fitted on " + std::to_string(scales_.size()) +
                      " columns, matrix has " + std::to_string(features.cols()));
  Matrix out = features;
  for (std::size_t r = 0; r < out.rows(); ++r) apply_in_place(out.row(r));
  return out;
}

ODPairDataset NormalizationParams::apply(const ODPairDataset& data) const {
  std::vector<ODRow> rows = data.rows();
  for (auto& row : rows) apply_in_place(row.values);
  return ODPairDataset(data.schema(), std::move(rows));
}

}  // namespace cem
