#include "circsim/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "circsim/errors.hpp"
#include "circsim/pipelines.hpp"
#include "circsim/units.hpp"

namespace circsim::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using seq::format_g12;

namespace {

constexpr double kRamseySeparationUs = 15.0;  // set by the ramsey preset
constexpr double kTwoPhotonMult = 2.0;

std::string g(double v) { return format_g12(v); }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << content;
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::string dump_json(const ordered_json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Fit helpers
// ---------------------------------------------------------------------------

fit::FitResult fit_raman_line(const seq::SpectrumDataset& ds, double rabi_kHz,
                              double duration_us) {
  fit::FitModel model = fit::FitModel::rabi(rabi_kHz, duration_us);
  double lo = *std::min_element(ds.value.begin(), ds.value.end());
  double hi = *std::max_element(ds.value.begin(), ds.value.end());
  model.param("amp").value = std::max(hi - lo, 1e-3);
  // The scan is centered on the expected resonance. Seeding there instead of
  // at the data argmax keeps the fit on the right feature when the pulse
  // area is a multiple of 2 pi and the line is a dip between side lobes.
  model.param("center").value = 0.5 * (ds.axis.front() + ds.axis.back());
  model.param("offset").value = lo;
  return fit::fit(ds, model);
}

// Seeds a free-frequency sinusoid from the data: frequency from mean
// crossings, phase from the first point. Axis in us, frequency in cycles/us.
fit::FitResult fit_time_oscillation(const seq::SpectrumDataset& ds) {
  const auto& x = ds.axis;
  const auto& y = ds.value;
  double lo = *std::min_element(y.begin(), y.end());
  double hi = *std::max_element(y.begin(), y.end());
  double mean = 0.5 * (lo + hi);
  int crossings = 0;
  for (size_t i = 1; i < y.size(); ++i) {
    if ((y[i - 1] - mean) * (y[i] - mean) < 0.0) ++crossings;
  }
  double span = x.back() - x.front();
  double freq = crossings > 0 && span > 0.0
                    ? 0.5 * crossings / span
                    : 1.0 / std::max(span, 1.0);
  fit::FitModel model = fit::FitModel::fringe();
  model.param("offset").value = mean;
  model.param("amp").value = std::max(0.5 * (hi - lo), 1e-3);
  model.param("freq").value = freq;
  // y ~ offset + amp cos(2 pi f x + phase); first point at the minimum of a
  // transfer oscillation starting from zero -> phase ~ pi.
  model.param("phase").value = y.front() < mean ? pi : 0.0;
  return fit::fit(ds, model);
}

// ---------------------------------------------------------------------------
// Analysis stages
// ---------------------------------------------------------------------------

struct JobRun {
  Job job;
  seq::SequenceSpec spec;
  seq::SpectrumDataset data;
};

void analysis_three_step(const RunConfig& cfg, const std::vector<JobRun>& runs,
                         ordered_json& report, std::ostringstream& summary) {
  fit::MwPipelineReport rep = fit::mw_three_step_pipeline(
      runs[0].data, runs[1].data, runs[2].data, kTwoPhotonMult);
  double model_split =
      core::total_delta_kHz(cfg.shift, 49) - core::total_delta_kHz(cfg.shift, 51);

  report["photon_mult"] = kTwoPhotonMult;
  report["reference"] = {{"nu0_GHz", rep.nu0_GHz},
                         {"sigma_nu0_kHz", rep.sigma_nu0_kHz},
                         {"w0_kHz", rep.w0_kHz},
                         {"sigma_w0_kHz", rep.sigma_w0_kHz},
                         {"area0", rep.area0}};
  report["pumped"] = {{"nu32_GHz", rep.nu32_GHz},
                      {"nu12_GHz", rep.nu12_GHz},
                      {"splitting_kHz", rep.splitting_kHz},
                      {"sigma_splitting_kHz", rep.sigma_splitting_kHz},
                      {"area32", rep.area32},
                      {"area12", rep.area12},
                      {"rel32", rep.rel32},
                      {"rel12", rep.rel12}};
  report["repumped"] = {{"area32_prime", rep.area32_prime},
                        {"area0_prime", rep.area0_prime},
                        {"rel32_prime", rep.rel32_prime},
                        {"rel0_prime", rep.rel0_prime}};
  report["model_splitting_kHz"] = model_split;

  summary << "reference line: nu0 = " << g(rep.nu0_GHz) << " GHz +/- "
          << g(rep.sigma_nu0_kHz) << " kHz, w0 = " << g(rep.w0_kHz)
          << " +/- " << g(rep.sigma_w0_kHz) << " kHz\n";
  summary << "class splitting: " << g(rep.splitting_kHz) << " +/- "
          << g(rep.sigma_splitting_kHz) << " kHz (model value "
          << g(model_split) << " kHz)\n";
  summary << "area table (relative to the reference line):\n";
  summary << "  line                 area           relative\n";
  summary << "  reference            " << g(rep.area0) << "   1\n";
  summary << "  pumped |mj|=3/2      " << g(rep.area32) << "   "
          << g(rep.rel32) << "\n";
  summary << "  pumped |mj|=1/2      " << g(rep.area12) << "   "
          << g(rep.rel12) << "\n";
  summary << "  repumped |mj|=3/2    " << g(rep.area32_prime) << "   "
          << g(rep.rel32_prime) << "\n";
  summary << "  repumped residual    " << g(rep.area0_prime) << "   "
          << g(rep.rel0_prime) << "\n";
}

struct RamanLineRow {
  std::string label;
  int n = 0;
  double power = 0.0;
  double resonance_kHz = 0.0;
  double sigma_kHz = 0.0;
};

std::vector<RamanLineRow> fit_raman_jobs(const RunConfig& cfg,
                                         const std::vector<JobRun>& runs,
                                         ordered_json& lines) {
  seq::ModelBundle bundle = cfg.bundle();
  std::vector<RamanLineRow> rows;
  for (const JobRun& run : runs) {
    seq::RamanSettings set = seq::raman_settings_for(
        run.job.raman_n, run.job.raman_duration_us, run.job.raman_power,
        bundle);
    fit::FitResult res =
        fit_raman_line(run.data, set.rabi_kHz, run.job.raman_duration_us);
    if (!res.converged) {
      throw std::runtime_error("line fit for job '" + run.job.label +
                               "' did not converge: " + res.message);
    }
    RamanLineRow row;
    row.label = run.job.label;
    row.n = run.job.raman_n;
    row.power = run.job.raman_power;
    row.resonance_kHz = res.value("center");
    row.sigma_kHz = res.sigma_of("center");
    rows.push_back(row);
    lines.push_back({{"label", row.label},
                     {"n", row.n},
                     {"power", row.power},
                     {"duration_us", run.job.raman_duration_us},
                     {"rabi_kHz", set.rabi_kHz},
                     {"resonance_kHz", row.resonance_kHz},
                     {"sigma_kHz", row.sigma_kHz},
                     {"amp", res.value("amp")},
                     {"offset", res.value("offset")},
                     {"chi2", res.chi2},
                     {"dof", res.dof}});
  }
  return rows;
}

void summarize_lines(const std::vector<RamanLineRow>& rows,
                     std::ostringstream& summary) {
  summary << "fitted core-flip resonances:\n";
  summary << "  job            n    power    resonance [kHz]   sigma [kHz]\n";
  for (const auto& r : rows) {
    summary << "  " << r.label;
    for (size_t i = r.label.size(); i < 15; ++i) summary << ' ';
    summary << r.n << "   " << g(r.power) << "   " << g(r.resonance_kHz)
            << "   " << g(r.sigma_kHz) << "\n";
  }
}

void analysis_raman_lines(const RunConfig& cfg,
                          const std::vector<JobRun>& runs,
                          ordered_json& report, std::ostringstream& summary) {
  ordered_json lines = ordered_json::array();
  std::vector<RamanLineRow> rows = fit_raman_jobs(cfg, runs, lines);
  report["lines"] = lines;
  summarize_lines(rows, summary);
  if (rows.size() == 2 && rows[0].n != rows[1].n) {
    double sep = std::abs(rows[0].resonance_kHz - rows[1].resonance_kHz);
    double sig = std::hypot(rows[0].sigma_kHz, rows[1].sigma_kHz);
    report["separation_kHz"] = sep;
    report["sigma_separation_kHz"] = sig;
    summary << "line separation: " << g(sep) << " +/- " << g(sig)
            << " kHz\n";
  }
}

void analysis_theta(const RunConfig& cfg, const std::vector<JobRun>& runs,
                    ordered_json& report, std::ostringstream& summary) {
  ordered_json lines = ordered_json::array();
  std::vector<RamanLineRow> rows = fit_raman_jobs(cfg, runs, lines);
  report["lines"] = lines;
  summarize_lines(rows, summary);

  std::map<int, std::vector<std::array<double, 3>>> by_n;
  for (const auto& r : rows) {
    by_n[r.n].push_back({r.power, r.resonance_kHz, r.sigma_kHz});
  }
  ordered_json extrap = ordered_json::array();
  std::vector<fit::DeltaPoint> deltas;
  summary << "zero-power extrapolation:\n";
  summary << "  n    delta_n [kHz]   sigma [kHz]   slope [kHz/power]\n";
  for (const auto& [n, points] : by_n) {
    fit::ExtrapolationResult ex = fit::light_shift_extrapolate(points);
    extrap.push_back({{"n", n},
                      {"delta_kHz", ex.intercept_kHz},
                      {"sigma_kHz", ex.sigma_intercept_kHz},
                      {"slope_kHz_per_power", ex.slope_kHz_per_power},
                      {"sigma_slope_kHz", ex.sigma_slope_kHz}});
    deltas.push_back({n, ex.intercept_kHz, ex.sigma_intercept_kHz});
    summary << "  " << n << "   " << g(ex.intercept_kHz) << "   "
            << g(ex.sigma_intercept_kHz) << "   "
            << g(ex.slope_kHz_per_power) << "\n";
  }
  report["extrapolation"] = extrap;

  if (by_n.size() >= 2) {
    fit::ThetaReport th = fit::fit_B_extract_theta(
        deltas, cfg.shift.dipole_C_kHz, cfg.sigma_C_kHz, cfg.shift);
    report["quadrupole"] = {{"B_kHz", th.B_kHz},
                            {"sigma_B_kHz", th.sigma_B_kHz},
                            {"theta", th.theta},
                            {"sigma_theta", th.sigma_theta},
                            {"C_kHz", cfg.shift.dipole_C_kHz},
                            {"sigma_C_kHz", cfg.sigma_C_kHz}};
    summary << "quadrupole coefficient fit: B = " << g(th.B_kHz) << " +/- "
            << g(th.sigma_B_kHz) << " kHz\n";
    summary << "core quadrupole moment: Theta = " << g(th.theta) << " +/- "
            << g(th.sigma_theta) << " atomic units\n";
  }
}

void analysis_fringe_pair(const std::vector<JobRun>& runs,
                          ordered_json& report, std::ostringstream& summary) {
  fit::RamseyPhaseReport rep = fit::ramsey_phase_report(
      runs[0].data, runs[1].data, kRamseySeparationUs, kTwoPhotonMult);
  report["separation_us"] = kRamseySeparationUs;
  report["phase_off_rad"] = rep.phase_off_rad;
  report["phase_on_rad"] = rep.phase_on_rad;
  report["shift_rad"] = rep.shift_rad;
  report["shift_minus_pi_rad"] = std::abs(rep.shift_rad) - pi;
  report["amp_off"] = rep.amp_off;
  report["amp_on"] = rep.amp_on;
  summary << "fringe phase shift: " << g(rep.shift_rad)
          << " rad (|shift| - pi = " << g(std::abs(rep.shift_rad) - pi)
          << " rad)\n";
  summary << "fringe amplitude without pulse: " << g(rep.amp_off) << "\n";
  summary << "fringe amplitude with pulse:    " << g(rep.amp_on) << "\n";
}

void analysis_filter(const RunConfig& cfg, const std::vector<JobRun>& runs,
                     ordered_json& report, std::ostringstream& summary) {
  fit::FilterReport rep = fit::filter_report(runs[0].data, runs[1].data);
  double beat_us = 1e3 / (core::total_delta_kHz(cfg.shift, 50) -
                          core::total_delta_kHz(cfg.shift, 51));
  report["pulse_separation_us"] = beat_us;
  report["transfer_5s"] = rep.transfer_5s;
  report["retention_4d"] = rep.retention_4d;
  summary << "filter pulse separation (one class beat period): "
          << g(beat_us) << " us\n";
  summary << "5s-class transfer at the filter resonance: "
          << g(rep.transfer_5s) << "\n";
  summary << "4d-class retention at the same point:      "
          << g(rep.retention_4d) << "\n";
}

void analysis_time_rabi(const std::vector<JobRun>& runs, ordered_json& report,
                        std::ostringstream& summary) {
  ordered_json rows = ordered_json::array();
  summary << "core-flip oscillation versus pulse duration:\n";
  for (const JobRun& run : runs) {
    fit::FitResult res = fit_time_oscillation(run.data);
    if (!res.converged) {
      throw std::runtime_error("oscillation fit for job '" + run.job.label +
                               "' did not converge: " + res.message);
    }
    size_t mid = run.data.axis.size() / 2;
    double freq_kHz = res.value("freq") * 1e3;
    rows.push_back({{"label", run.job.label},
                    {"freq_kHz", freq_kHz},
                    {"sigma_freq_kHz", res.sigma_of("freq") * 1e3},
                    {"amp", std::abs(res.value("amp"))},
                    {"offset", res.value("offset")},
                    {"closure_duration_us", run.data.axis[mid]},
                    {"transfer_at_closure", run.data.value[mid]}});
    summary << "  " << run.job.label << ": oscillation " << g(freq_kHz)
            << " kHz, amplitude " << g(std::abs(res.value("amp")))
            << ", transfer " << g(run.data.value[mid]) << " at "
            << g(run.data.axis[mid]) << " us\n";
  }
  report["oscillations"] = rows;
}

void analysis_phase_scan(const std::vector<JobRun>& runs, ordered_json& report,
                         std::ostringstream& summary) {
  ordered_json rows = ordered_json::array();
  summary << "fringe phase shift versus pulse detuning:\n";
  summary << "  delta [kHz]    shift [rad]    |shift|-pi [rad]    amp\n";
  double best_delta = 0.0, best_gap = -1.0;
  for (size_t i = 1; i < runs.size(); ++i) {
    fit::RamseyPhaseReport rep = fit::ramsey_phase_report(
        runs[0].data, runs[i].data, kRamseySeparationUs, kTwoPhotonMult);
    double delta = runs[i].job.ramsey_delta_kHz.value_or(0.0);
    double gap = pi - std::abs(rep.shift_rad);
    rows.push_back({{"label", runs[i].job.label},
                    {"delta_kHz", delta},
                    {"shift_rad", rep.shift_rad},
                    {"amp", rep.amp_on}});
    summary << "  " << g(delta) << "   " << g(rep.shift_rad) << "   "
            << g(-gap) << "   " << g(rep.amp_on) << "\n";
    if (best_gap < 0.0 || gap < best_gap) {
      best_gap = gap;
      best_delta = delta;
    }
  }
  report["points"] = rows;
  report["amp_off"] = fit::ramsey_phase_report(runs[0].data, runs[0].data,
                                               kRamseySeparationUs,
                                               kTwoPhotonMult)
                          .amp_off;
  report["delta_with_pi_flip_kHz"] = best_delta;
  summary << "closest to a pi flip: delta = " << g(best_delta) << " kHz\n";
}

}  // namespace

std::string resolve_out_dir(const RunConfig& cfg, const RunOptions& opts) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  std::string leaf = cfg.name.empty() ? "run" : cfg.name;
  if (const char* env = std::getenv("CIRCSIM_OUT_DIR")) {
    if (*env) return std::string(env) + "/" + leaf;
  }
  return "out/" + leaf;
}

RunOutcome run_config(const RunConfig& cfg_in, const RunOptions& opts) {
  RunConfig cfg = cfg_in;
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.noiseless) {
    cfg.shots_per_point = 0;
    cfg.imperfections.mw_jitter_sigma_kHz = 0.0;
    for (Job& job : cfg.jobs) {
      if (job.inline_spec) job.inline_spec->jitter_sigma_kHz = 0.0;
    }
  }
  validate_config(cfg);

  seq::ModelBundle bundle = cfg.bundle();
  std::vector<JobRun> runs;
  runs.reserve(cfg.jobs.size());
  try {
    for (Job& job : cfg.jobs) {
      double resolved_delta = 0.0;
      seq::SequenceSpec spec = build_job_sequence(
          job, cfg, /*resolve_delta=*/true, &resolved_delta);
      if (job.preset == "ramsey_switch" && job.ramsey_raman_on &&
          !job.ramsey_delta_kHz) {
        job.ramsey_delta_kHz = resolved_delta;
      }
      runs.push_back({job, std::move(spec), {}});
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("build", e.what());
  }

  std::string out_dir = resolve_out_dir(cfg, opts);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw ConfigError("out_dir: cannot create '" + out_dir +
                      "': " + ec.message());
  }
  {
    std::ofstream probe(fs::path(out_dir) / "resolved_config.json",
                        std::ios::binary);
    if (!probe) {
      throw ConfigError("out_dir: '" + out_dir + "' is not writable");
    }
  }

  try {
    write_file(fs::path(out_dir) / "resolved_config.json",
               dump_json(config_to_json(cfg)));
  } catch (const std::exception& e) {
    throw StageError("write", e.what());
  }

  for (size_t i = 0; i < runs.size(); ++i) {
    const std::string& label = runs[i].job.label;
    if (!opts.quiet) {
      std::printf("running job '%s' (%zu points)\n", label.c_str(),
                  runs[i].spec.scan.values.size());
      std::fflush(stdout);
    }
    try {
      std::uint64_t rng_seed =
          cfg.seed.value_or(0) + 0x9E3779B97F4A7C15ULL * i;
      runs[i].data = seq::run_sequence(runs[i].spec, bundle, rng_seed);
    } catch (const std::exception& e) {
      throw StageError("run:" + label, e.what());
    }
    try {
      write_file(fs::path(out_dir) / (label + ".csv"),
                 seq::dataset_csv(runs[i].data));
      write_file(fs::path(out_dir) / (label + ".meta.json"),
                 dump_json(seq::dataset_sidecar(runs[i].data)));
    } catch (const std::exception& e) {
      throw StageError("write", e.what());
    }
  }

  ordered_json report;
  report["analysis"] = cfg.analysis;
  if (!cfg.name.empty()) report["name"] = cfg.name;
  ordered_json labels = ordered_json::array();
  for (const JobRun& run : runs) labels.push_back(run.job.label);
  report["jobs"] = labels;

  std::ostringstream summary;
  summary << (cfg.name.empty() ? std::string("run") : cfg.name);
  if (!cfg.description.empty()) summary << ": " << cfg.description;
  summary << "\n";
  summary << "jobs:";
  for (const JobRun& run : runs) summary << " " << run.job.label;
  summary << "\n";
  if (cfg.shots_per_point > 0) {
    summary << "shots per point: " << cfg.shots_per_point << ", seed "
            << *cfg.seed << "\n";
  } else {
    summary << "noiseless expectation values\n";
  }
  summary << "\n";

  try {
    if (cfg.analysis == "three_step") {
      analysis_three_step(cfg, runs, report, summary);
    } else if (cfg.analysis == "raman_lines") {
      analysis_raman_lines(cfg, runs, report, summary);
    } else if (cfg.analysis == "theta_extraction") {
      analysis_theta(cfg, runs, report, summary);
    } else if (cfg.analysis == "fringe_pair") {
      analysis_fringe_pair(runs, report, summary);
    } else if (cfg.analysis == "filter_report") {
      analysis_filter(cfg, runs, report, summary);
    } else if (cfg.analysis == "time_rabi") {
      analysis_time_rabi(runs, report, summary);
    } else if (cfg.analysis == "phase_scan") {
      analysis_phase_scan(runs, report, summary);
    }
  } catch (const std::exception& e) {
    throw StageError("analysis", e.what());
  }

  RunOutcome outcome;
  outcome.out_dir = out_dir;
  outcome.resolved = cfg;
  outcome.fit_report = report;
  outcome.summary = summary.str();
  try {
    write_file(fs::path(out_dir) / "fit_report.json", dump_json(report));
    write_file(fs::path(out_dir) / "summary.txt", outcome.summary);
  } catch (const std::exception& e) {
    throw StageError("write", e.what());
  }
  return outcome;
}

}  // namespace circsim::cli
