#pragma once

// Comma-separated result tables. The header names every column with its unit
// in brackets, e.g. "T_out [K]".

#include <filesystem>
#include <string>
#include <vector>

namespace fbrsim::app {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  // Index of the column whose name (without unit) is `name`, or -1.
  int column(const std::string& name) const;
};

// Fixed 12 significant digits so repeated runs give identical bytes.
std::string format_number(double v);

void write_table(const Table& t, const std::filesystem::path& path);
// Throws ConfigError on unreadable or ragged files.
Table read_table(const std::filesystem::path& path);

}  // namespace fbrsim::app
