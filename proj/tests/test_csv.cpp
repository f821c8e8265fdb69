#include "twinfock/csv.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>

using namespace twinfock;

TEST_CASE("shortest round-trip number formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("records round-trip") {
  std::vector<CountRecord> r{{0, Cycle::Jz, 4999.5, 5000.25, -1.0 / 3.0},
                             {1, Cycle::Jperp, 1e-300, 7.0, 0.0}};
  std::stringstream s;
  write_records(s, r);
  CHECK(s.str().rfind("shot,cycle,n_a,n_b,n_leftover\n", 0) == 0);
  CHECK(read_records(s) == r);
}

TEST_CASE("record parsing errors carry line numbers") {
  std::istringstream crlf("shot,cycle,n_a,n_b,n_leftover\r\n3,Jz,1,2,3\r\n");
  CHECK(read_records(crlf).at(0).shot == 3);
  std::istringstream bad_header("a,b\n");
  CHECK_THROWS_AS(read_records(bad_header), CsvError);
  std::istringstream bad_row("shot,cycle,n_a,n_b,n_leftover\n0,Jz,1,2,3\n1,Jy,1,2,3\n");
  try {
    read_records(bad_row);
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  std::istringstream short_row("shot,cycle,n_a,n_b,n_leftover\n0,Jz,1,2\n");
  CHECK_THROWS_AS(read_records(short_row), CsvError);
  CHECK_THROWS_AS(read_records_file("/nonexistent.csv"), CsvError);
}

TEST_CASE("tables") {
  Table t;
  t.add("x", {1.0, 2.0});
  t.add("y", {0.5, 0.25});
  std::ostringstream s;
  write_table(s, t);
  CHECK(s.str() == "x,y\n1,0.5\n2,0.25\n");
  CHECK_THROWS(t.add("z", {1.0}));
}
