#include "aane/csv.hpp"
#include "aane/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

using namespace aane;

TEST_CASE("numbers print with 12 significant digits and no negative zero") {
  CHECK(csv::format_number(0.1) == "0.1");
  CHECK(csv::format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(csv::format_number(-0.0) == "0");
  CHECK(csv::format_number(1e-20) == "1e-20");
  CHECK(csv::format_number(123456789012345.0) == "1.23456789012e+14");
}

TEST_CASE("missing fields parse as NaN") {
  CHECK(std::isnan(csv::parse_number("", "x")));
  CHECK(std::isnan(csv::parse_number("NA", "x")));
  CHECK(csv::parse_number("2.5", "x") == 2.5);
  CHECK_THROWS_AS(csv::parse_number("abc", "x"), Error);
}

TEST_CASE("round trip with quoted fields") {
  testing::TempDir dir("csv");
  csv::Writer w({"name", "value"});
  w.add_row({"plain", "1"});
  w.add_row({"with,comma", "2"});
  w.add_row({"with \"quote\"", "3"});
  w.save(dir.path / "sub" / "t.csv");
  const auto t = csv::read(dir.path / "sub" / "t.csv");
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[1][0] == "with,comma");
  CHECK(t.rows[2][0] == "with \"quote\"");
  CHECK(t.column("value") == 1);
  CHECK_THROWS_AS(t.column("missing"), Error);
}

TEST_CASE("ragged rows are rejected") {
  testing::TempDir dir("csv");
  std::ofstream(dir.path / "bad.csv") << "a,b\n1,2\n3\n";
  CHECK_THROWS_AS(csv::read(dir.path / "bad.csv"), Error);
}

TEST_CASE("writer rejects rows of the wrong width") {
  csv::Writer w({"a", "b"});
  CHECK_THROWS(w.add_row({"1"}));
}
