#include "cem/dataset.hpp"

#include <charconv>
#include <fstream>
#include <unordered_set>

#include "cem/csv.hpp"
#include "cem/error.hpp"

namespace cem {

namespace {

double parse_cell(const std::string& cell, const std::string& column, std::size_t row) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ParseError("row " + std::to_string(row) + ": cannot parse \"" + cell +
                     "\" in column \"" + column + "\"");
  return value;
}

}  // namespace

ODPairDataset::ODPairDataset(FeatureSchema schema, std::vector<ODRow> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  std::unordered_set<std::string> keys;
  keys.reserve(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (r.values.size() != schema_.feature_count())
      throw SchemaError("row " + std::to_string(i) + ": expected " +
                        std::to_string(schema_.feature_count()) + " feature values, got " +
                        std::to_string(r.values.size()));
    if (r.target < 0.0)
      throw DataError("row " + std::to_string(i) + ": negative target");
    if (!keys.insert(r.origin + "\x1f" + r.destination).second)
      throw DuplicateKeyError("duplicate OD pair (" + r.origin + ", " + r.destination +
                              ") at row " + std::to_string(i));
  }
}

ODPairDataset ODPairDataset::load_csv(const std::filesystem::path& path,
                                      const FeatureSchema& schema) {
  const CsvTable table = read_csv(path);

  std::vector<std::size_t> col_index;
  col_index.reserve(schema.columns().size());
  for (const auto& col : schema.columns()) col_index.push_back(table.column(col.name));

  const std::size_t origin_col = col_index[0];
  const std::size_t dest_col = col_index[1];
  const std::size_t dep_col = table.column(schema.dependent_column());

  std::vector<ODRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    if (cells.size() < table.header.size())
      throw ParseError("row " + std::to_string(r) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    ODRow row;
    row.origin = cells[origin_col];
    row.destination = cells[dest_col];
    row.target = parse_cell(cells[dep_col], schema.dependent_column(), r);
    row.values.reserve(schema.feature_count());
    for (std::size_t f = 0; f < schema.feature_count(); ++f) {
      const std::string& name = schema.feature_names()[f];
      row.values.push_back(parse_cell(cells[table.column(name)], name, r));
    }
    rows.push_back(std::move(row));
  }
  return ODPairDataset(schema, std::move(rows));
}

void ODPairDataset::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path.string());
  bool first = true;
  for (const auto& col : schema_.columns()) {
    if (!first) out << ',';
    out << csv_escape(col.name);
    first = false;
  }
  out << '\n';
  for (const auto& r : rows_) {
    out << csv_escape(r.origin) << ',' << csv_escape(r.destination);
    std::size_t f = 0;
    for (std::size_t c = 2; c < schema_.columns().size(); ++c) {
      out << ',';
      if (schema_.columns()[c].role == ColumnRole::dependent)
        out << format_double(r.target);
      else
        out << format_double(r.values[f++]);
    }
    out << '\n';
  }
}

Matrix ODPairDataset::feature_matrix() const {
  Matrix m(rows_.size(), schema_.feature_count());
  for (std::size_t i = 0; i < rows_.size(); ++i)
    for (std::size_t j = 0; j < schema_.feature_count(); ++j) m(i, j) = rows_[i].values[j];
  return m;
}

std::vector<double> ODPairDataset::targets() const {
  std::vector<double> y(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) y[i] = rows_[i].target;
  return y;
}

ODPairDataset ODPairDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<ODRow> rows;
  rows.reserve(indices.size());
  for (std::size_t i : indices) rows.push_back(rows_[i]);
  return ODPairDataset(schema_, std::move(rows));
}

}  // namespace cem
