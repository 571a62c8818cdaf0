#pragma once

#include <string>
#include <vector>

namespace vigilkit::io {

/// Header plus rows of raw cells. Cells are comma separated; double quotes
/// protect commas and embedded quotes are doubled.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// -1 when absent.
  int column(const std::string& name) const;
  std::vector<double> numeric_column(int index) const;
};

Table read_csv(const std::string& path);
Table parse_csv(const std::string& text);
void write_csv(const Table& table, const std::string& path);
std::string to_csv(const Table& table);

/// Shortest round-trip decimal representation.
std::string format_number(double v);

}  // namespace vigilkit::io
