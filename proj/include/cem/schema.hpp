#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace cem {

enum class ColumnRole {
  key,
  dependent,
  travel_impedance,
  socio_economic,
  built_environment,
  transit_supply,
};

ColumnRole role_from_string(const std::string& s);
std::string role_to_string(ColumnRole role);

struct Column {
  std::string name;
  ColumnRole role;
};

// Ordered column list for an OD-pair table. The two key columns come first
// (origin tract, destination tract), exactly one column is the dependent
// variable, and everything else is a numeric feature.
class FeatureSchema {
 public:
  static FeatureSchema from_columns(std::vector<Column> columns);
  static FeatureSchema from_json_file(const std::filesystem::path& path);
  static FeatureSchema from_json_text(const std::string& text);

  const std::vector<Column>& columns() const { return columns_; }

  const std::string& origin_column() const { return columns_[0].name; }
  const std::string& destination_column() const { return columns_[1].name; }
  const std::string& dependent_column() const { return columns_[dependent_].name; }

  // Feature columns = every non-key, non-dependent column, in schema order.
  std::size_t feature_count() const { return feature_names_.size(); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  ColumnRole feature_role(std::size_t feature_index) const;

  // Indices (into the feature vector) of features used for data-driven
  // clustering: everything except travel-impedance columns.
  std::vector<std::size_t> clustering_feature_indices() const;

  std::string to_json_text() const;

  bool operator==(const FeatureSchema& o) const {
    if (columns_.size() != o.columns_.size()) return false;
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i].name != o.columns_[i].name || columns_[i].role != o.columns_[i].role)
        return false;
    return true;
  }

 private:
  std::vector<Column> columns_;
  std::vector<std::string> feature_names_;
  std::vector<std::size_t> feature_to_column_;
  std::size_t dependent_ = 0;
};

}  // namespace cem
