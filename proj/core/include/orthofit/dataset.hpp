#pragma once

// CSV ingestion for grouped multivariate data. The dialect is deliberately
// strict: comma separated, mandatory header row, '.' decimal separator, no
// quoting. A missing or non-numeric cell in a column the caller selected is
// an error that names the offending data row, never a silently dropped or
// imputed value.

#include <iosfwd>
#include <string>
#include <vector>

#include "orthofit/cpc.hpp"

namespace orthofit {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // raw cells, one vector per data row

  // Throws ParseError when the column is absent.
  std::size_t column_index(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);  // ParseError on unreadable file

struct DatasetConfig {
  std::string group_column;
  std::vector<std::string> variable_columns;  // at least two
  bool log_transform = false;                 // natural log of every variable
};

// Splits the table into one matrix per distinct group label, in order of
// first appearance. Throws ParseError for missing/non-numeric cells in the
// selected columns (with the 1-based data row) and for non-positive values
// under the log transform; group-size problems surface as DegenerateGroup
// from the GroupedDataset constructor.
GroupedDataset make_grouped(const CsvTable& table, const DatasetConfig& config);

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

// Re-emits a grouped dataset in the same dialect: header with the group
// column first, then one row per observation, values via format_double so a
// read-back reproduces every double bit for bit.
void write_csv(std::ostream& out, const GroupedDataset& data,
               const std::string& group_column,
               const std::vector<std::string>& variable_columns);

}  // namespace orthofit
