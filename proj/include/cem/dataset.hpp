#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cem/matrix.hpp"
#include "cem/schema.hpp"

namespace cem {

struct ODRow {
  std::string origin;
  std::string destination;
  std::vector<double> values;  // feature columns, schema order
  double target = 0.0;
};

// Immutable once constructed; safe for concurrent reads.
class ODPairDataset {
 public:
  ODPairDataset() = default;
  ODPairDataset(FeatureSchema schema, std::vector<ODRow> rows);

  static ODPairDataset load_csv(const std::filesystem::path& path,
                                const FeatureSchema& schema);
  void save_csv(const std::filesystem::path& path) const;

  const FeatureSchema& schema() const { return schema_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const ODRow& row(std::size_t i) const { return rows_[i]; }
  const std::vector<ODRow>& rows() const { return rows_; }

  Matrix feature_matrix() const;
  std::vector<double> targets() const;

  ODPairDataset subset(std::span<const std::size_t> indices) const;

 private:
  FeatureSchema schema_;
  std::vector<ODRow> rows_;
};

}  // namespace cem
