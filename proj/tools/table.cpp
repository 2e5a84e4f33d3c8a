#include "table.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fbrsim/errors.hpp"

namespace fbrsim::app {

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw std::logic_error("table row has the wrong width");
  rows.push_back(std::move(row));
}

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const std::string& c = columns[i];
    const std::string bare = c.substr(0, c.find(" ["));
    if (bare == name) return static_cast<int>(i);
  }
  return -1;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

void write_table(const Table& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_number(r[i]);
    out << '\n';
  }
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty table");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(cell == "nan" ? std::nan("") : std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != t.columns.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": wrong number of columns");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace fbrsim::app
