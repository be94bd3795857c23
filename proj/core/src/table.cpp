#include "sysid/table.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sysid {

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("Table: row width does not match header");
  }
  rows.push_back(std::move(row));
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string to_csv(const Table& table) {
  std::string out;
  for (size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

void write_csv_file(const Table& table, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open for writing: " + path);
  file << to_csv(table);
  if (!file) throw std::runtime_error("write failed: " + path);
}

Table parse_csv(const std::string& text) {
  Table table;
  std::istringstream lines(text);
  std::string line;
  bool header = true;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    if (header) {
      while (std::getline(fields, field, ',')) table.columns.push_back(field);
      header = false;
      continue;
    }
    std::vector<double> row;
    while (std::getline(fields, field, ',')) {
      size_t used = 0;
      row.push_back(std::stod(field, &used));
      if (used != field.size()) {
        throw std::invalid_argument("parse_csv: non-numeric cell: " + field);
      }
    }
    table.add_row(std::move(row));
  }
  return table;
}

}  // namespace sysid
