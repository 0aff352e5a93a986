#pragma once

// Runs one subcommand from a validated configuration and writes its outputs:
// data CSVs, summary.json (figures of merit), config.json (canonical config)
// and manifest.json (hash, version, checksums, timing).

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "photongen/errors.hpp"
#include "photongen/io/config.hpp"
#include "photongen/io/csv.hpp"

namespace photongen::io {

std::string_view version();

struct RunReport {
  std::string subcommand;
  std::string output_dir;
  std::map<std::string, std::string> checksums;  // file name -> FNV-1a 64 hex, manifest excluded
  std::string summary;                           // summary.json contents
  long long steps = 0;
  double wall_clock = 0.0;  // seconds
};

/// Throws photongen::Error on any failure; nothing is written for the
/// manifest in that case.
RunReport run_subcommand(const std::string& subcommand, const RunConfig& config);

/// Exit status for a failed run: 2 for configuration errors, 1 for module
/// failures. Success is 0.
int exit_code_for(ErrorCode code);

/// Writes {"error": {"code", "message", "subcommand"}} to dir/error.json, where
/// code is an ErrorCode name or "internal";
/// returns false if the file could not be written.
bool write_error_record(const std::string& dir, const std::string& subcommand, std::string_view code,
                        const std::string& message);

/// EmissionRecord as CSV columns t, I, Q, P, p0..p{levels-1}, gamma1 (SI).
CsvTable record_table(const EmissionRecord& record);

}  // namespace photongen::io
