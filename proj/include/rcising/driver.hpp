#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcising/analysis.hpp"
#include "rcising/config.hpp"
#include "rcising/error.hpp"

namespace rci {

/// Process exit codes shared by the CLI and the C API.
enum ExitCode : int {
  exit_ok = 0,
  exit_verify_failed = 1,
  exit_condition = 2,
  exit_config = 3,
  exit_io = 4,
  exit_missing_input = 5,
};

int exit_code_for(ErrorCode code);

/// Condition report for the configured graph; exit_condition when a check fails.
struct ValidateOutcome {
  int exit_code = exit_ok;
  nlohmann::json report;
};
ValidateOutcome run_validate(const RunConfig& config);

/// Identity sweep configured by [experiment] and [model]; `filter` is a
/// comma-separated list of identity names (empty: all).
struct VerifyOutcome {
  int exit_code = exit_ok;
  nlohmann::json records = nlohmann::json::array();
  nlohmann::json summary;
};
VerifyOutcome run_verify(const RunConfig& config, const std::string& filter, int workers);

/// Every scan named in [experiment]. Scans that take one size run once per
/// listed size. Returns the scan results in configuration order.
std::vector<ScanResult> run_scans(const RunConfig& config, int workers);

/// run_scans plus files: <dir>/<scan_id>.csv and <dir>/manifest.json.
struct ScanOutcome {
  int exit_code = exit_ok;
  std::vector<std::string> files;
  nlohmann::json manifest;
};
ScanOutcome run_scan_to_dir(const RunConfig& config, int workers);

/// Summary table of the manifest and CSV files in `dir`, grouped by scan.
std::string run_report(const std::string& dir);

}  // namespace rci
