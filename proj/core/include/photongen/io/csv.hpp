#pragma once

// Plain CSV tables: one header row, numeric columns, 17 significant digits so
// that every double survives a write/read round trip unchanged.

#include <cstdint>
#include <string>
#include <vector>

namespace photongen::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // columns[c][row]

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  /// Index of the named column; throws ErrorCode::io if absent.
  std::size_t column(const std::string& name) const;
  const std::vector<double>& operator[](const std::string& name) const { return columns[column(name)]; }
  void add(const std::string& name, std::vector<double> values);
  void validate() const;
};

std::string format_double(double value);

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

/// Reads a whole file; throws ErrorCode::io on failure.
std::string read_file(const std::string& path);
/// Writes a whole file, creating parent directories; throws ErrorCode::io.
void write_file(const std::string& path, const std::string& text);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t value);

}  // namespace photongen::io
