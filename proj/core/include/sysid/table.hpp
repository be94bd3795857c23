#pragma once

#include <string>
#include <vector>

namespace sysid {

/// A rectangular numeric table with named columns, the CSV contract of the
/// CLI: header row, 17-significant-digit floats, LF endings, UTF-8.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
};

/// %.17g, enough digits for an exact double round trip.
std::string format_double(double value);

std::string to_csv(const Table& table);
void write_csv_file(const Table& table, const std::string& path);

/// Parses CSV produced by to_csv. Throws on ragged rows or non-numeric cells.
Table parse_csv(const std::string& text);

}  // namespace sysid
