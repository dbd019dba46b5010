#include "cem/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cem/error.hpp"

namespace cem {

ColumnRole role_from_string(const std::string& s) {
  if (s == "key") return ColumnRole::key;
  if (s == "dependent") return ColumnRole::dependent;
  if (s == "travel_impedance") return ColumnRole::travel_impedance;
  if (s == "socio_economic") return ColumnRole::socio_economic;
  if (s == "built_environment") return ColumnRole::built_environment;
  if (s == "transit_supply") return ColumnRole::transit_supply;
  throw ConfigError("unknown column role \"" + s + "\"");
}

std::string role_to_string(ColumnRole role) {
  switch (role) {
    case ColumnRole::key: return "key";
    case ColumnRole::dependent: return "dependent";
    case ColumnRole::travel_impedance: return "travel_impedance";
    case ColumnRole::socio_economic: return "socio_economic";
    case ColumnRole::built_environment: return "built_environment";
    case ColumnRole::transit_supply: return "transit_supply";
  }
  return "?";
}

FeatureSchema FeatureSchema::from_columns(std::vector<Column> columns) {
  FeatureSchema s;
  s.columns_ = std::move(columns);

  std::set<std::string> seen;
  std::size_t keys = 0, dependents = 0;
  for (std::size_t i = 0; i < s.columns_.size(); ++i) {
    const auto& col = s.columns_[i];
    if (!seen.insert(col.name).second)
      throw SchemaError("duplicate column name \"" + col.name + "\"");
    switch (col.role) {
      case ColumnRole::key:
        if (i > 1) throw SchemaError("key columns must be the first two columns");
        ++keys;
        break;
      case ColumnRole::dependent:
        s.dependent_ = i;
        ++dependents;
        break;
      default:
        s.feature_names_.push_back(col.name);
        s.feature_to_column_.push_back(i);
        break;
    }
  }
  if (keys != 2)
    throw SchemaError("schema needs exactly two key columns (origin, destination), got " +
                      std::to_string(keys));
  if (s.columns_[0].role != ColumnRole::key || s.columns_[1].role != ColumnRole::key)
    throw SchemaError("the first two schema columns must be the key columns");
  if (dependents != 1)
    throw SchemaError("schema needs exactly one dependent column, got " +
                      std::to_string(dependents));
  return s;
}

ColumnRole FeatureSchema::feature_role(std::size_t feature_index) const {
  return columns_[feature_to_column_[feature_index]].role;
}

std::vector<std::size_t> FeatureSchema::clustering_feature_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < feature_names_.size(); ++i)
    if (feature_role(i) != ColumnRole::travel_impedance) out.push_back(i);
  return out;
}

FeatureSchema FeatureSchema::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.contains("columns")) j = j["columns"];
  if (!j.is_array()) throw ConfigError("schema JSON must be an array of {name, role}");
  std::vector<Column> cols;
  for (const auto& item : j) {
    cols.push_back({item.at("name").get<std::string>(),
                    role_from_string(item.at("role").get<std::string>())});
  }
  return from_columns(std::move(cols));
}

FeatureSchema FeatureSchema::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string FeatureSchema::to_json_text() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& col : columns_)
    arr.push_back({{"name", col.name}, {"role", role_to_string(col.role)}});
  nlohmann::json j{{"columns", arr}};
  return j.dump(2);
}

}  // namespace cem
