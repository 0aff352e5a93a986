#include "photongen/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "photongen/errors.hpp"

namespace photongen::io {
namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::io, what); }

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t row, std::size_t col) {
  std::string s = cell;
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && s[start] == ' ') ++start;
  s = s.substr(start);
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    fail("csv: bad number '" + cell + "' at data row " + std::to_string(row + 1) + ", column " +
         std::to_string(col + 1));
  }
  return v;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  fail("csv: missing column '" + name + "'");
}

void CsvTable::add(const std::string& name, std::vector<double> values) {
  header.push_back(name);
  columns.push_back(std::move(values));
}

void CsvTable::validate() const {
  if (header.size() != columns.size()) fail("csv: header and column count differ");
  for (const auto& c : columns) {
    if (c.size() != rows()) fail("csv: columns have different lengths");
  }
  for (const auto& h : header) {
    if (h.empty() || h.find_first_of(",\n\r") != std::string::npos) fail("csv: bad column name '" + h + "'");
  }
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string to_csv(const CsvTable& table) {
  table.validate();
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out += ',';
    out += table.header[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out += ',';
      out += format_double(table.columns[c][r]);
    }
    out += '\n';
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CsvTable table;
  if (!std::getline(in, line)) fail("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_line(line);
  table.columns.assign(table.header.size(), {});
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      fail("csv: data row " + std::to_string(row + 1) + " has " + std::to_string(cells.size()) +
           " cells, expected " + std::to_string(table.header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) table.columns[c].push_back(parse_number(cells[c], row, c));
    ++row;
  }
  table.validate();
  return table;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("cannot open '" + path + "' for writing");
  out << text;
  if (!out) fail("write to '" + path + "' failed");
}

void write_csv(const std::string& path, const CsvTable& table) { write_file(path, to_csv(table)); }

CsvTable read_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace photongen::io
