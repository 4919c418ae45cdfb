#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rydcycle {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws InputError when the column is missing.
  std::size_t column_index(std::string_view name) const;
  /// Parses every cell of a column as double; empty cells become NaN.
  std::vector<double> numeric_column(std::string_view name) const;
};

/// Plain comma-separated values with a header row; no quoting.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest round-trip text of a double; NaN becomes an empty field.
std::string format_number(double v);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace rydcycle
