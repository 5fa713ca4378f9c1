#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "circsim/config.hpp"

namespace circsim::cli {

// A failure while executing an already-validated run (CLI exit code 3). The
// message names the stage that failed.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error("stage " + stage + ": " + what) {}
};

struct RunOptions {
  std::string out_dir;                       // overrides config and env
  std::optional<std::uint64_t> seed;         // overrides the config seed
  bool noiseless = false;  // shots_per_point = 0 and no source jitter
  bool quiet = true;       // no progress lines on stdout
};

struct RunOutcome {
  std::string out_dir;
  RunConfig resolved;  // after overrides and detuning resolution
  nlohmann::ordered_json fit_report;
  std::string summary;
};

// Resolution order for the output directory: options.out_dir, then the
// config's out_dir, then $CIRCSIM_OUT_DIR/<name>, then out/<name>.
std::string resolve_out_dir(const RunConfig& cfg, const RunOptions& opts);

// Validates, executes every job, runs the configured analysis, and writes
// <label>.csv, <label>.meta.json, fit_report.json, summary.txt and
// resolved_config.json into the output directory. Identical config and seed
// give byte-identical files. Throws ConfigError for invalid configurations
// and StageError for failures during execution.
RunOutcome run_config(const RunConfig& cfg, const RunOptions& opts = {});

}  // namespace circsim::cli
