#include "twinfock/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace twinfock {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double number(const std::string& field, int line) {
  double x = 0.0;
  const auto* b = field.data();
  const auto* e = b + field.size();
  if (b != e && *b == '+') ++b;
  const auto res = std::from_chars(b, e, x);
  if (res.ec != std::errc() || res.ptr != e || !std::isfinite(x))
    throw CsvError("line " + std::to_string(line) + ": bad number '" + field + "'");
  return x;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot write '" + path + "'");
  return out;
}

}  // namespace

void write_records(std::ostream& out, std::span<const CountRecord> records) {
  out << "shot,cycle,n_a,n_b,n_leftover\n";
  for (const auto& r : records)
    out << r.shot << ',' << to_string(r.cycle) << ',' << format_double(r.n_a) << ',' << format_double(r.n_b)
        << ',' << format_double(r.n_leftover) << '\n';
}

std::vector<CountRecord> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("empty record file");
  if (strip_cr(line) != "shot,cycle,n_a,n_b,n_leftover")
    throw CsvError("expected header 'shot,cycle,n_a,n_b,n_leftover'");
  std::vector<CountRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 5) throw CsvError("line " + std::to_string(lineno) + ": expected 5 fields");
    CountRecord r;
    const double shot = number(f[0], lineno);
    if (shot < 0 || shot != std::floor(shot)) throw CsvError("line " + std::to_string(lineno) + ": bad shot index");
    r.shot = static_cast<std::uint64_t>(shot);
    try {
      r.cycle = cycle_from_string(f[1]);
    } catch (const std::exception& e) {
      throw CsvError("line " + std::to_string(lineno) + ": " + e.what());
    }
    r.n_a = number(f[2], lineno);
    r.n_b = number(f[3], lineno);
    r.n_leftover = number(f[4], lineno);
    out.push_back(r);
  }
  return out;
}

std::vector<CountRecord> read_records_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open '" + path + "'");
  return read_records(in);
}

void Table::add(std::string name, std::vector<double> values) {
  if (!columns.empty() && values.size() != columns.front().size())
    throw std::invalid_argument("table column '" + name + "' has a different length");
  header.push_back(std::move(name));
  columns.push_back(std::move(values));
}

void write_table(std::ostream& out, const Table& table) {
  for (std::size_t j = 0; j < table.header.size(); ++j) out << (j ? "," : "") << table.header[j];
  out << '\n';
  const std::size_t rows = table.columns.empty() ? 0 : table.columns.front().size();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) out << (j ? "," : "") << format_double(table.columns[j][i]);
    out << '\n';
  }
}

void write_table_file(const std::string& path, const Table& table) {
  auto out = open_out(path);
  write_table(out, table);
}

void write_records_file(const std::string& path, std::span<const CountRecord> records) {
  auto out = open_out(path);
  write_records(out, records);
}

}  // namespace twinfock
