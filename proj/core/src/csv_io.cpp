#include "sdkim/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace sdkim {

namespace {

struct Raw {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based file line of each row
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << path.string() << ":" << line << ": " << what;
  throw CsvError(os.str());
}

[[noreturn]] void fail_cell(const std::filesystem::path& path, std::size_t line, std::size_t col,
                            const std::string& name, const std::string& what) {
  std::ostringstream os;
  os << "column " << col + 1 << " (" << name << "): " << what;
  fail(path, line, os.str());
}

Raw read_raw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(path.string() + ": cannot open file");
  Raw raw;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (!have_header) {
      raw.header = std::move(cells);
      for (std::size_t c = 0; c < raw.header.size(); ++c) {
        if (raw.header[c].empty()) fail_cell(path, number, c, "", "empty column name");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != raw.header.size()) {
      std::ostringstream os;
      os << "expected " << raw.header.size() << " cells, found " << cells.size();
      fail(path, number, os.str());
    }
    raw.rows.push_back(std::move(cells));
    raw.lines.push_back(number);
  }
  if (!have_header) throw CsvError(path.string() + ": empty file");
  return raw;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

NamedMatrix read_numeric(const std::filesystem::path& path, bool spins) {
  const Raw raw = read_raw(path);
  NamedMatrix out;
  out.names = raw.header;
  out.values.resize(static_cast<Index>(raw.rows.size()), static_cast<Index>(raw.header.size()));
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    for (std::size_t c = 0; c < raw.header.size(); ++c) {
      const std::string& cell = raw.rows[r][c];
      double v = 0.0;
      if (cell.empty()) fail_cell(path, raw.lines[r], c, raw.header[c], "missing value");
      if (!parse_double(cell, v)) fail_cell(path, raw.lines[r], c, raw.header[c], "not a number: '" + cell + "'");
      if (!std::isfinite(v)) fail_cell(path, raw.lines[r], c, raw.header[c], "non-finite value");
      if (spins && v != 1.0 && v != -1.0) {
        fail_cell(path, raw.lines[r], c, raw.header[c], "spin value must be -1 or +1, found '" + cell + "'");
      }
      out.values(static_cast<Index>(r), static_cast<Index>(c)) = v;
    }
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  return out;
}

}  // namespace

NamedMatrix read_spins(const std::filesystem::path& path) {
  NamedMatrix m = read_numeric(path, true);
  if (m.values.rows() < 2) throw CsvError(path.string() + ": need at least two time steps");
  return m;
}

NamedMatrix read_covariates(const std::filesystem::path& path) { return read_numeric(path, false); }

std::vector<Event> read_events(const std::filesystem::path& path) {
  const Raw raw = read_raw(path);
  if (raw.header.empty() || raw.header.size() > 2 || raw.header[0] != "time" ||
      (raw.header.size() == 2 && raw.header[1] != "label")) {
    throw CsvError(path.string() + ":1: events header must be 'time' or 'time,label'");
  }
  std::vector<Event> events;
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const std::string& cell = raw.rows[r][0];
    long long t = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), t);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || t < 0) {
      fail_cell(path, raw.lines[r], 0, "time", "not a non-negative integer: '" + cell + "'");
    }
    events.push_back({static_cast<Index>(t), raw.header.size() == 2 ? raw.rows[r][1] : std::string{}});
  }
  return events;
}

Vector read_series(const std::filesystem::path& path, const std::string& column) {
  const Raw raw = read_raw(path);
  std::size_t col = 0;
  if (!column.empty()) {
    const auto it = std::find(raw.header.begin(), raw.header.end(), column);
    if (it == raw.header.end()) throw CsvError(path.string() + ":1: no column named '" + column + "'");
    col = static_cast<std::size_t>(it - raw.header.begin());
  } else if (raw.header.size() != 1) {
    throw CsvError(path.string() + ":1: several columns present; name the one to read");
  }
  Vector out(static_cast<Index>(raw.rows.size()));
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    double v = 0.0;
    // nan marks excluded edge values of a decomposition
    if (!parse_double(raw.rows[r][col], v) || std::isinf(v)) {
      fail_cell(path, raw.lines[r], col, raw.header[col], "not a number: '" + raw.rows[r][col] + "'");
    }
    out(static_cast<Index>(r)) = v;
  }
  return out;
}

std::string format_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    if (std::isnan(*d)) return "nan";
    if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, *d);
    return std::string(buf, res.ptr);
  }
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

void write_matrix(const std::filesystem::path& path, const std::vector<std::string>& names, const Matrix& values) {
  if (static_cast<Index>(names.size()) != values.cols()) {
    throw std::invalid_argument("write_matrix: name count differs from column count");
  }
  auto out = open_out(path);
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_cell(values(r, c));
    out << '\n';
  }
}

void write_events(const std::filesystem::path& path, const std::vector<Event>& events) {
  const bool labeled = std::any_of(events.begin(), events.end(), [](const Event& e) { return !e.label.empty(); });
  auto out = open_out(path);
  out << (labeled ? "time,label" : "time") << '\n';
  for (const Event& e : events) {
    out << e.time;
    if (labeled) out << ',' << e.label;
    out << '\n';
  }
}

std::vector<std::string> default_names(const std::string& prefix, Index count) {
  std::vector<std::string> names;
  for (Index i = 0; i < count; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("Table::add_row: wrong number of cells");
  rows.push_back(std::move(row));
}

Index Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("Table: no column " + name);
  return static_cast<Index>(it - columns.begin());
}

std::vector<double> Table::numeric(const std::string& name) const {
  const auto c = static_cast<std::size_t>(column(name));
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (const auto* d = std::get_if<double>(&row[c])) out.push_back(*d);
    else if (const auto* i = std::get_if<std::int64_t>(&row[c])) out.push_back(static_cast<double>(*i));
    else throw std::invalid_argument("Table: column " + name + " is not numeric");
  }
  return out;
}

void write_table(const std::filesystem::path& path, const Table& table) {
  auto out = open_out(path);
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_cell(row[c]);
    out << '\n';
  }
}

Table factor_path_table(const FactorPath& path) {
  const auto names = factor_names(path.kind, path.covariates);
  Table t;
  t.columns.push_back("t");
  for (const auto& n : names) t.columns.push_back(n);
  for (const auto& n : names) t.columns.push_back("score_" + n);
  for (const auto& n : names) t.columns.push_back("fisher_" + n);
  t.columns.push_back("loglik");
  for (Index r = 0; r < path.steps(); ++r) {
    std::vector<Cell> row{static_cast<std::int64_t>(r)};
    for (Index m = 0; m < path.factors(); ++m) row.emplace_back(path.values(r, m));
    for (Index m = 0; m < path.factors(); ++m) row.emplace_back(path.score(r, m));
    for (Index m = 0; m < path.factors(); ++m) row.emplace_back(path.fisher(r, m));
    row.emplace_back(path.loglik(r));
    t.add_row(std::move(row));
  }
  return t;
}

Table roc_table(const RocCurve& roc) {
  Table t;
  t.columns = {"threshold", "fpr", "tpr"};
  for (std::size_t i = 0; i < roc.fpr.size(); ++i) t.add_row({roc.threshold[i], roc.fpr[i], roc.tpr[i]});
  return t;
}

Table lm_table(const std::vector<LmTestResult>& results) {
  Table t;
  t.columns = {"factor", "null", "statistic", "p_value", "dof", "defined", "null_constant"};
  for (const auto& r : results) {
    t.add_row({r.factor_name, r.null_model, r.statistic, r.p_value, static_cast<std::int64_t>(r.dof),
               static_cast<std::int64_t>(r.defined ? 1 : 0), r.tested_constant});
  }
  return t;
}

Table decomposition_table(const Vector& series, const Decomposition& d) {
  Table t;
  t.columns = {"t", "series", "trend", "seasonal", "residual"};
  for (Index i = 0; i < series.size(); ++i) {
    t.add_row({static_cast<std::int64_t>(i), series(i), d.trend(i), d.seasonal(i), d.residual(i)});
  }
  return t;
}

Table event_curve_table(const std::vector<EventCurve>& curves) {
  Table t;
  t.columns = {"label", "lag", "mean", "band", "events_used", "events_dropped"};
  for (const auto& c : curves) {
    for (std::size_t l = 0; l < c.lag.size(); ++l) {
      t.add_row({c.label.empty() ? std::string("all") : c.label, static_cast<std::int64_t>(c.lag[l]),
                 c.mean(static_cast<Index>(l)), c.band, static_cast<std::int64_t>(c.events_used),
                 static_cast<std::int64_t>(c.events_dropped)});
    }
  }
  return t;
}

}  // namespace sdkim
