#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "seld/foa.hpp"
#include "seld/ssl.hpp"

namespace seld::cli {

// Effective analysis settings: defaults, then the --config file, then
// individual flags.
struct AnalysisConfig {
  SslConfig ssl;
  AngleRange azimuth{-180.0, 180.0};
  AngleRange elevation{-40.0, 40.0};
  double resolution = 10.0;

  DoaGrid grid() const;
};

// Keys are the SslConfig field names plus an optional "grid" object with
// azimuth_min, azimuth_max, elevation_min, elevation_max, resolution.
// Unknown keys are rejected.
AnalysisConfig parse_analysis_config(const std::string& json);

// Returns the process exit code. Diagnostics go to `err` as one line.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace seld::cli
