#pragma once

// CSV interchange: count records (`shot,cycle,n_a,n_b,n_leftover`) and
// plain numeric tables for scans. Numbers are written in the shortest
// round-trip form so identical runs give identical bytes.

#include "twinfock/measurement.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace twinfock {

std::string format_double(double x);

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_records(std::ostream& out, std::span<const CountRecord> records);
// Header required; throws CsvError with the offending line.
std::vector<CountRecord> read_records(std::istream& in);
std::vector<CountRecord> read_records_file(const std::string& path);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // equal lengths

  void add(std::string name, std::vector<double> values);
};

void write_table(std::ostream& out, const Table& table);
void write_table_file(const std::string& path, const Table& table);
void write_records_file(const std::string& path, std::span<const CountRecord> records);

}  // namespace twinfock
