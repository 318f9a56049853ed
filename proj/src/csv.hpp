#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "singheat/common.hpp"

namespace singheat::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Numeric CSV with one header row. Blank lines and lines starting with '#' are skipped.
inline Table read_numeric(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  Table table;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      table.header = cells;
      have_header = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": not a number: '" + c + "'");
      }
    }
    if (row.size() != table.header.size())
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(table.header.size()) + " columns");
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw ConfigError("'" + path + "' is empty");
  return table;
}

/// Row writer; every number goes through format_double so output is bit-reproducible.
class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path) {
    if (!out_) throw ConfigError("cannot write '" + path + "'");
  }

  Writer& header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) out_ << (i ? "," : "") << names[i];
    out_ << '\n';
    return *this;
  }

  template <class... Cells>
  Writer& row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << to_cell(cells), first = false), ...);
    out_ << '\n';
    return *this;
  }

 private:
  static std::string to_cell(double v) { return format_double(v); }
  static std::string to_cell(int v) { return std::to_string(v); }
  static std::string to_cell(std::size_t v) { return std::to_string(v); }
  static std::string to_cell(const std::string& s) { return s; }
  static std::string to_cell(const char* s) { return s; }

  std::ofstream out_;
};

}  // namespace singheat::csv
