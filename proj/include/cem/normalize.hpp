#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cem/dataset.hpp"
#include "cem/matrix.hpp"

namespace cem {

struct ColumnScale {
  double min = 0.0;
  double max = 0.0;
  bool constant = false;  // max == min
};

// Min-max scaling to [0,1] for a subset of feature columns. Values outside
// the fitted range (new data) are clamped; constant columns map to 0.
class NormalizationParams {
 public:
  NormalizationParams() = default;

  // columns: indices into the schema's feature vector. Empty span = all.
  static NormalizationParams fit(const ODPairDataset& data,
                                 std::span<const std::size_t> columns = {});
  static NormalizationParams fit(const Matrix& features,
                                 std::span<const std::size_t> columns = {});

  std::size_t feature_count() const { return scales_.size(); }
  bool covers(std::size_t feature_index) const {
    return feature_index < scales_.size() && scales_[feature_index].has_value();
  }
  const ColumnScale& scale(std::size_t feature_index) const;

  double normalize_value(std::size_t feature_index, double x) const;
  double denormalize_value(std::size_t feature_index, double x) const;

  // Transforms covered columns, leaves the rest untouched.
  ODPairDataset apply(const ODPairDataset& data) const;
  Matrix apply(const Matrix& features) const;
  void apply_in_place(std::span<double> row_values) const;

  // Serialization support.
  std::vector<std::optional<ColumnScale>>& raw() { return scales_; }
  const std::vector<std::optional<ColumnScale>>& raw() const { return scales_; }

 private:
  std::vector<std::optional<ColumnScale>> scales_;  // one slot per feature column
};

}  // namespace cem
