#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "circsim/presets.hpp"
#include "circsim/sequences.hpp"

namespace circsim::cli {

// Optional reshaping of a preset job's scan axis. Units follow the preset's
// scan path (GHz for microwave source scans, kHz for the Raman detuning).
// Either explicit `values`, or any of center / half_span / points with the
// missing pieces taken from the preset's own scan.
struct ScanOverride {
  std::optional<double> center;
  std::optional<double> half_span;
  std::optional<int> points;
  std::optional<std::vector<double>> values;
  bool empty() const {
    return !center && !half_span && !points && !values;
  }
};

// One sequence to run: a named preset with its arguments, or a fully
// explicit inline sequence. `label` names the output files.
struct Job {
  std::string label;
  std::string preset;  // empty for inline jobs

  // mw_spectroscopy
  std::string mw_variant = "no_pump";
  // raman_spectroscopy
  int raman_n = 51;
  double raman_duration_us = 17.0;
  double raman_power = 1.0;
  // ramsey_switch. A missing delta means "resolve the phase-flip detuning
  // numerically at run time" (recorded in resolved_config.json).
  bool ramsey_raman_on = false;
  std::optional<double> ramsey_delta_kHz;
  double ramsey_power = 1.0;
  // purification_filter
  bool filter_start_in_4d = false;

  ScanOverride scan;
  std::optional<seq::SequenceSpec> inline_spec;
};

// A complete declarative run: model, imperfections, jobs, and the analysis
// to apply to the produced datasets.
struct RunConfig {
  std::string name;         // optional tag, used in summaries
  std::string description;  // free text

  core::ShiftModel shift;
  std::vector<std::array<double, 3>> nu0_entries;  // {n_a, n_b, GHz}; empty
                                                   // keeps the default table
  dyn::PumpRates pump;
  seq::Imperfections imperfections;

  int shots_per_point = 0;
  std::optional<std::uint64_t> seed;  // required when shots_per_point > 0
  std::string out_dir;                // optional; CLI/env may override

  std::vector<Job> jobs;

  // none | three_step | raman_lines | theta_extraction | fringe_pair |
  // filter_report | time_rabi | phase_scan
  std::string analysis = "none";
  double sigma_C_kHz = 1.0;  // dipole-coefficient uncertainty used by
                             // theta_extraction

  seq::ModelBundle bundle() const;
};

// Parsing and validation throw ConfigError. Parse errors carry
// "<origin>:<line>:<column>"; semantic errors carry the dotted field path.
RunConfig config_from_json(const nlohmann::ordered_json& j,
                           const std::string& origin = "config");
RunConfig parse_config_text(const std::string& text,
                            const std::string& origin = "config");
RunConfig parse_config_file(const std::string& path);

nlohmann::ordered_json config_to_json(const RunConfig& cfg);
nlohmann::ordered_json sequence_to_json(const seq::SequenceSpec& spec);
seq::SequenceSpec sequence_from_json(const nlohmann::ordered_json& j,
                                     const std::string& path);

// Structural and cross-reference validation without executing any scan:
// preset names and arguments, job labels, analysis/job compatibility, and a
// full dry validation of every sequence the config would build (unresolved
// phase-flip detunings are checked with a placeholder). Throws ConfigError.
void validate_config(const RunConfig& cfg);

// Builds the sequence for one job. For ramsey jobs with an unresolved delta,
// `resolve_delta` = false substitutes the class splitting (structure-only
// validation) instead of running the numerical search.
seq::SequenceSpec build_job_sequence(const Job& job, const RunConfig& cfg,
                                     bool resolve_delta,
                                     double* resolved_delta_kHz = nullptr);

const std::vector<std::string>& known_presets();
const std::vector<std::string>& known_analyses();

}  // namespace circsim::cli
