#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "rowrl/common.hpp"

namespace rowrl {

// Tiny comma-separated table reader for the metrics files (no quoting; the
// writer never emits commas inside fields).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw DomainError("csv: missing column '" + name + "'");
  }

  double number(std::size_t row, int col) const {
    return std::stod(rows[row][col]);
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DomainError("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != t.header.size())
      throw DomainError("csv: ragged row");
    t.rows.push_back(std::move(fields));
  }
  return t;
}

}  // namespace rowrl
