#pragma once

// Plain comma-separated files: a header row followed by one row per record.
// No quoting; cells may not contain commas. Numbers are written with 17
// significant digits so a write/read cycle is exact.

#include "sdkim/diagnostics.hpp"
#include "sdkim/timeseries.hpp"
#include "sdkim/types.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sdkim {

/// Malformed input; the message names the file, line and column.
class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedMatrix {
  std::vector<std::string> names;
  Matrix values;
};

NamedMatrix read_spins(const std::filesystem::path& path);
NamedMatrix read_covariates(const std::filesystem::path& path);
/// Header `time` or `time,label`; time is a non-negative integer step index.
std::vector<Event> read_events(const std::filesystem::path& path);

/// Single numeric column selected by name; `nan` cells are kept.
Vector read_series(const std::filesystem::path& path, const std::string& column = "");

void write_matrix(const std::filesystem::path& path, const std::vector<std::string>& names, const Matrix& values);
void write_events(const std::filesystem::path& path, const std::vector<Event>& events);

/// Default column names s0, s1, ... or x0, x1, ...
std::vector<std::string> default_names(const std::string& prefix, Index count);

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  Index column(const std::string& name) const;
  /// Numeric view of a column (integers widened); throws for string cells.
  std::vector<double> numeric(const std::string& name) const;
};

void write_table(const std::filesystem::path& path, const Table& table);
std::string format_cell(const Cell& cell);

Table factor_path_table(const FactorPath& path);
Table roc_table(const RocCurve& roc);
Table lm_table(const std::vector<LmTestResult>& results);
Table decomposition_table(const Vector& series, const Decomposition& d);
Table event_curve_table(const std::vector<EventCurve>& curves);

}  // namespace sdkim
