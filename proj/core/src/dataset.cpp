#include "orthofit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "orthofit/errors.hpp"

namespace orthofit {

namespace {

std::string trim(const std::string& s) {
  const auto from = s.find_first_not_of(" \t\r");
  if (from == std::string::npos) return {};
  const auto to = s.find_last_not_of(" \t\r");
  return s.substr(from, to - from + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

double parse_cell(const std::string& cell, const std::string& column,
                  std::size_t data_row) {
  if (cell.empty()) {
    throw ParseError("missing value in column '" + column + "' at data row " +
                     std::to_string(data_row));
  }
  double value = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("cannot parse '" + cell + "' in column '" + column +
                     "' at data row " + std::to_string(data_row));
  }
  return value;
}

}  // namespace

std::size_t CsvTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) {
    throw ParseError("no column named '" + name + "' in the header");
  }
  return static_cast<std::size_t>(it - columns.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("empty input: a header row is mandatory");
  }
  table.columns = split_line(line);
  for (const auto& name : table.columns) {
    if (name.empty()) throw ParseError("empty column name in the header");
  }
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;  // tolerate a trailing blank line
    auto cells = split_line(line);
    if (cells.size() != table.columns.size()) {
      throw ParseError("data row " + std::to_string(table.rows.size() + 1) +
                       " has " + std::to_string(cells.size()) +
                       " cells, header has " + std::to_string(table.columns.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open '" + path + "'");
  }
  return read_csv(in);
}

GroupedDataset make_grouped(const CsvTable& table, const DatasetConfig& config) {
  if (config.variable_columns.size() < 2) {
    throw ParseError("need at least two variable columns");
  }
  const std::size_t group_col = table.column_index(config.group_column);
  std::vector<std::size_t> var_cols;
  var_cols.reserve(config.variable_columns.size());
  for (const auto& name : config.variable_columns) {
    var_cols.push_back(table.column_index(name));
  }

  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // row-major per group
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::size_t data_row = r + 1;
    const auto& cells = table.rows[r];
    const std::string& label = cells[group_col];
    if (label.empty()) {
      throw ParseError("missing value in column '" + config.group_column +
                       "' at data row " + std::to_string(data_row));
    }
    auto it = std::find(names.begin(), names.end(), label);
    if (it == names.end()) {
      names.push_back(label);
      values.emplace_back();
      it = names.end() - 1;
    }
    const std::size_t j = static_cast<std::size_t>(it - names.begin());
    for (std::size_t c = 0; c < var_cols.size(); ++c) {
      double v = parse_cell(cells[var_cols[c]], config.variable_columns[c], data_row);
      if (config.log_transform) {
        if (!(v > 0.0)) {
          throw ParseError("cannot log-transform non-positive value '" +
                           cells[var_cols[c]] + "' in column '" +
                           config.variable_columns[c] + "' at data row " +
                           std::to_string(data_row));
        }
        v = std::log(v);
      }
      values[j].push_back(v);
    }
  }
  if (names.empty()) {
    throw ParseError("no data rows");
  }

  const std::size_t d = var_cols.size();
  std::vector<DenseMatrix> groups;
  groups.reserve(names.size());
  for (auto& v : values) {
    groups.emplace_back(v.size() / d, d, std::move(v));
  }
  return GroupedDataset(std::move(names), std::move(groups));
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const GroupedDataset& data,
               const std::string& group_column,
               const std::vector<std::string>& variable_columns) {
  if (variable_columns.size() != data.d()) {
    throw LengthMismatch("write_csv: " + std::to_string(variable_columns.size()) +
                         " column names for dimension " + std::to_string(data.d()));
  }
  out << group_column;
  for (const auto& name : variable_columns) out << ',' << name;
  out << '\n';
  for (std::size_t j = 0; j < data.k(); ++j) {
    const DenseMatrix& g = data.group(j);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      out << data.name(j);
      for (std::size_t c = 0; c < g.cols(); ++c) out << ',' << format_double(g(i, c));
      out << '\n';
    }
  }
}

}  // namespace orthofit
