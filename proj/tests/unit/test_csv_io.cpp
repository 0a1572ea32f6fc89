#include <doctest.h>

#include "support.hpp"

#include <sdkim/csv_io.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace sdkim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sdkim_test_csv";
  fs::create_directories(dir);
  return dir / name;
}

fs::path fixture(const std::string& name) { return fs::path(SDKIM_FIXTURE_DIR) / name; }

std::string error_of(const fs::path& p) {
  try {
    read_spins(p);
  } catch (const CsvError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("spin fixture is read with its header") {
  const NamedMatrix m = read_spins(fixture("spins_3x2.csv"));
  CHECK(m.names == std::vector<std::string>{"s0", "s1"});
  REQUIRE(m.values.rows() == 3);
  CHECK(m.values(0, 0) == 1.0);
  CHECK(m.values(0, 1) == -1.0);
  CHECK(m.values(2, 1) == 1.0);
}

TEST_CASE("malformed spin files name the offending cell") {
  const std::string bad = error_of(fixture("spins_bad_cell.csv"));
  CHECK(bad.find(":3:") != std::string::npos);
  CHECK(bad.find("column 2 (s1)") != std::string::npos);
  const std::string ragged = error_of(fixture("spins_ragged.csv"));
  CHECK(ragged.find(":3:") != std::string::npos);
  CHECK(error_of(scratch("missing.csv")).find("cannot open") != std::string::npos);
}

TEST_CASE("matrix write then read is the identity") {
  Rng rng(1);
  Matrix x(40, 3);
  for (Index r = 0; r < 40; ++r) x.row(r) = test::gaussian_vector(3, rng, 1e3).transpose();
  x(0, 0) = 1e-300;
  x(1, 1) = -0.1;
  x(2, 2) = 1.0 / 3.0;
  const fs::path p = scratch("cov.csv");
  write_matrix(p, default_names("x", 3), x);
  const NamedMatrix back = read_covariates(p);
  CHECK(back.names == std::vector<std::string>{"x0", "x1", "x2"});
  CHECK(back.values == x);

  Matrix s(5, 2);
  s << 1, -1, -1, -1, 1, 1, -1, 1, 1, 1;
  write_matrix(scratch("s.csv"), default_names("s", 2), s);
  CHECK(read_spins(scratch("s.csv")).values == s);
}

TEST_CASE("events and series round trip") {
  const std::vector<Event> events{{3, "a"}, {17, "b"}, {40, ""}};
  write_events(scratch("events.csv"), events);
  const auto back = read_events(scratch("events.csv"));
  REQUIRE(back.size() == 3);
  CHECK(back[1].time == 17);
  CHECK(back[1].label == "b");
  CHECK(read_events(fixture("events.csv")).size() == 3);

  Table t;
  t.columns = {"t", "value"};
  t.add_row({std::int64_t{0}, std::numeric_limits<double>::quiet_NaN()});
  t.add_row({std::int64_t{1}, 0.1});
  t.add_row({std::int64_t{2}, 2.0 / 3.0});
  write_table(scratch("series.csv"), t);
  const Vector v = read_series(scratch("series.csv"), "value");
  REQUIRE(v.size() == 3);
  CHECK(std::isnan(v(0)));
  CHECK(v(1) == 0.1);
  CHECK(v(2) == 2.0 / 3.0);
  CHECK_THROWS_AS(read_series(scratch("series.csv")), CsvError);
  CHECK_THROWS_AS(read_series(scratch("series.csv"), "nope"), CsvError);
}

TEST_CASE("cell formatting is shortest round trip") {
  CHECK(format_cell(0.1) == "0.1");
  CHECK(format_cell(std::int64_t{-7}) == "-7");
  CHECK(format_cell(std::string("ok")) == "ok");
  CHECK(format_cell(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_cell(-std::numeric_limits<double>::infinity()) == "-inf");
  for (double x : {1.0 / 3.0, 1e-310, 123456789.123456789, -2.5e17}) CHECK(std::strtod(format_cell(x).c_str(), nullptr) == x);
}

TEST_CASE("table helpers") {
  Table t;
  t.columns = {"a", "b"};
  t.add_row({1.5, std::int64_t{2}});
  CHECK(t.column("b") == 1);
  CHECK(t.numeric("b") == std::vector<double>{2.0});
  CHECK_THROWS(t.add_row({1.0}));
  CHECK_THROWS(t.column("c"));

  FactorPath path;
  path.kind = ModelKind::dynokim;
  path.values = Matrix::Ones(3, 1);
  path.score = Matrix::Zero(3, 1);
  path.fisher = Matrix::Ones(3, 1);
  path.loglik = Vector::Zero(3);
  const Table ft = factor_path_table(path);
  CHECK(ft.columns == std::vector<std::string>{"t", "beta", "score_beta", "fisher_beta", "loglik"});
  CHECK(ft.rows.size() == 3);
}
