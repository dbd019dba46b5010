#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cem {

// Minimal RFC-4180-ish CSV support: comma separator, optional double-quoted
// fields, CR/LF tolerant. All fields come back as strings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or throws SchemaError naming the column.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(const std::string& line);

// Quotes fields only when they contain a comma, quote, or newline.
std::string csv_escape(const std::string& field);

// Shortest representation that round-trips the double exactly.
std::string format_double(double x);

}  // namespace cem
