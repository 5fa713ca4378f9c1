#include "circsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "circsim/errors.hpp"

namespace circsim::cli {

using nlohmann::ordered_json;

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

std::string type_name(const ordered_json& j) {
  switch (j.type()) {
    case ordered_json::value_t::null: return "null";
    case ordered_json::value_t::boolean: return "a boolean";
    case ordered_json::value_t::string: return "a string";
    case ordered_json::value_t::array: return "an array";
    case ordered_json::value_t::object: return "an object";
    default: return j.is_number() ? "a number" : "an unexpected value";
  }
}

void check_keys(const ordered_json& obj, const std::string& path,
                const std::vector<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object, got " + type_name(obj));
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      fail(path + "." + it.key(),
           "unknown field; valid fields: " + join(allowed));
    }
  }
}

const ordered_json* find(const ordered_json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double as_number(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number, got " + type_name(j));
  return j.get<double>();
}

int as_int(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) {
    fail(path, "expected an integer, got " + type_name(j));
  }
  return j.get<int>();
}

bool as_bool(const ordered_json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean, got " + type_name(j));
  return j.get<bool>();
}

std::string as_string(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string, got " + type_name(j));
  return j.get<std::string>();
}

double opt_number(const ordered_json& obj, const std::string& path,
                  const std::string& key, double fallback) {
  const ordered_json* j = find(obj, key);
  return j ? as_number(*j, path + "." + key) : fallback;
}

int opt_int(const ordered_json& obj, const std::string& path,
            const std::string& key, int fallback) {
  const ordered_json* j = find(obj, key);
  return j ? as_int(*j, path + "." + key) : fallback;
}

bool opt_bool(const ordered_json& obj, const std::string& path,
              const std::string& key, bool fallback) {
  const ordered_json* j = find(obj, key);
  return j ? as_bool(*j, path + "." + key) : fallback;
}

std::string opt_string(const ordered_json& obj, const std::string& path,
                       const std::string& key, const std::string& fallback) {
  const ordered_json* j = find(obj, key);
  return j ? as_string(*j, path + "." + key) : fallback;
}

std::vector<double> as_number_array(const ordered_json& j,
                                    const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array, got " + type_name(j));
  std::vector<double> out;
  out.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enumerated names
// ---------------------------------------------------------------------------

const std::vector<std::string> kPresets = {
    "mw_spectroscopy", "raman_spectroscopy", "ramsey_switch",
    "purification_filter"};

const std::vector<std::string> kAnalyses = {
    "none",         "three_step",    "raman_lines", "theta_extraction",
    "fringe_pair",  "filter_report", "time_rabi",   "phase_scan"};

const std::vector<std::string> kMwVariants = {"no_pump", "pump",
                                              "pump_plus_repump"};

core::ShiftMode mode_from_string(const std::string& s,
                                 const std::string& path) {
  if (s == "exact_hydrogenic") return core::ShiftMode::exact_hydrogenic;
  if (s == "power_law") return core::ShiftMode::power_law;
  fail(path, "unknown mode '" + s +
                 "'; valid modes: exact_hydrogenic, power_law");
}

std::string mode_to_string(core::ShiftMode m) {
  return m == core::ShiftMode::exact_hydrogenic ? "exact_hydrogenic"
                                                : "power_law";
}

core::CoreTerm term_from_string(const std::string& s, const std::string& path) {
  if (s == "5s") return core::CoreTerm::s5_half;
  if (s == "5p") return core::CoreTerm::p5_half;
  if (s == "4d") return core::CoreTerm::d4_threehalf;
  fail(path, "unknown core term '" + s + "'; valid terms: 5s, 5p, 4d");
}

std::string term_to_string(core::CoreTerm t) {
  switch (t) {
    case core::CoreTerm::s5_half: return "5s";
    case core::CoreTerm::p5_half: return "5p";
    default: return "4d";
  }
}

// ---------------------------------------------------------------------------
// Level / pulse / sequence JSON
// ---------------------------------------------------------------------------

core::CompositeLevel level_from_json(const ordered_json& j,
                                     const std::string& path) {
  check_keys(j, path, {"n", "kind", "core"});
  core::CompositeLevel level;
  const ordered_json* n = find(j, "n");
  if (!n) fail(path + ".n", "required field is missing");
  level.rydberg.n = as_int(*n, path + ".n");
  std::string kind = opt_string(j, path, "kind", "circular");
  if (kind == "circular") {
    level.rydberg.kind = core::RydbergKind::circular;
  } else if (kind == "elliptical") {
    level.rydberg.kind = core::RydbergKind::elliptical_marker;
  } else {
    fail(path + ".kind",
         "unknown kind '" + kind + "'; valid kinds: circular, elliptical");
  }
  const ordered_json* c = find(j, "core");
  if (!c) fail(path + ".core", "required field is missing");
  check_keys(*c, path + ".core", {"term", "two_mj"});
  const ordered_json* term = find(*c, "term");
  if (!term) fail(path + ".core.term", "required field is missing");
  level.core.term =
      term_from_string(as_string(*term, path + ".core.term"), path + ".core.term");
  const ordered_json* mj = find(*c, "two_mj");
  if (!mj) fail(path + ".core.two_mj", "required field is missing");
  level.core.two_mj = as_int(*mj, path + ".core.two_mj");
  if (!core::core_level_valid(level.core)) {
    fail(path + ".core.two_mj", "invalid two_mj " +
                                    std::to_string(level.core.two_mj) +
                                    " for term " + term_to_string(level.core.term));
  }
  return level;
}

ordered_json level_to_json(const core::CompositeLevel& level) {
  ordered_json j;
  j["n"] = level.rydberg.n;
  j["kind"] = level.rydberg.kind == core::RydbergKind::circular
                  ? "circular"
                  : "elliptical";
  j["core"] = {{"term", term_to_string(level.core.term)},
               {"two_mj", level.core.two_mj}};
  return j;
}

dyn::MicrowavePulse microwave_from_json(const ordered_json& j,
                                        const std::string& path) {
  check_keys(j, path,
             {"type", "n_hi", "n_lo", "two_photon", "source_freq_GHz",
              "rabi_kHz", "duration_us", "use_shared_source"});
  dyn::MicrowavePulse p;
  p.n_hi = opt_int(j, path, "n_hi", 0);
  p.n_lo = opt_int(j, path, "n_lo", 0);
  p.two_photon = opt_bool(j, path, "two_photon", true);
  p.source_freq_GHz = opt_number(j, path, "source_freq_GHz", 0.0);
  p.rabi_kHz = opt_number(j, path, "rabi_kHz", 0.0);
  p.duration_us = opt_number(j, path, "duration_us", 0.0);
  p.use_shared_source = opt_bool(j, path, "use_shared_source", false);
  if (p.duration_us < 0.0) fail(path + ".duration_us", "must be >= 0");
  return p;
}

ordered_json microwave_to_json(const dyn::MicrowavePulse& p) {
  ordered_json j;
  j["type"] = "microwave";
  j["n_hi"] = p.n_hi;
  j["n_lo"] = p.n_lo;
  j["two_photon"] = p.two_photon;
  j["source_freq_GHz"] = p.source_freq_GHz;
  j["rabi_kHz"] = p.rabi_kHz;
  j["duration_us"] = p.duration_us;
  j["use_shared_source"] = p.use_shared_source;
  return j;
}

dyn::PulseSpec pulse_from_json(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object, got " + type_name(j));
  std::string type = opt_string(j, path, "type", "");
  if (type == "microwave") return microwave_from_json(j, path);
  if (type == "raman") {
    check_keys(j, path,
               {"type", "big_delta_GHz", "small_delta_kHz", "omega_pi_kHz",
                "omega_sigma_kHz", "duration_us", "scattering_on"});
    dyn::RamanPulse p;
    p.big_delta_GHz = opt_number(j, path, "big_delta_GHz", 0.65);
    p.small_delta_kHz = opt_number(j, path, "small_delta_kHz", 0.0);
    p.omega_pi_kHz = opt_number(j, path, "omega_pi_kHz", 0.0);
    p.omega_sigma_kHz = opt_number(j, path, "omega_sigma_kHz", 0.0);
    p.duration_us = opt_number(j, path, "duration_us", 0.0);
    p.scattering_on = opt_bool(j, path, "scattering_on", true);
    if (p.duration_us < 0.0) fail(path + ".duration_us", "must be >= 0");
    return p;
  }
  if (type == "pump_422") {
    check_keys(j, path,
               {"type", "duration_us", "repumper_on", "repumper_overhang_us"});
    dyn::OpticalPump422 p;
    p.duration_us = opt_number(j, path, "duration_us", 0.0);
    p.repumper_on = opt_bool(j, path, "repumper_on", true);
    p.repumper_overhang_us = opt_number(j, path, "repumper_overhang_us", 0.0);
    if (p.duration_us < 0.0) fail(path + ".duration_us", "must be >= 0");
    if (p.repumper_overhang_us < 0.0) {
      fail(path + ".repumper_overhang_us", "must be >= 0");
    }
    return p;
  }
  if (type == "probe") {
    check_keys(j, path, {"type", "n_from", "n_to", "duration_us"});
    dyn::ProbePulse p;
    p.n_from = opt_int(j, path, "n_from", 0);
    p.n_to = opt_int(j, path, "n_to", 0);
    p.duration_us = opt_number(j, path, "duration_us", 0.0);
    if (p.duration_us < 0.0) fail(path + ".duration_us", "must be >= 0");
    return p;
  }
  fail(path + ".type",
       "unknown pulse type '" + type +
           "'; valid types: microwave, raman, pump_422, probe");
}

ordered_json pulse_to_json(const dyn::PulseSpec& pulse) {
  ordered_json j;
  if (const auto* mw = std::get_if<dyn::MicrowavePulse>(&pulse)) {
    return microwave_to_json(*mw);
  }
  if (const auto* rp = std::get_if<dyn::RamanPulse>(&pulse)) {
    j["type"] = "raman";
    j["big_delta_GHz"] = rp->big_delta_GHz;
    j["small_delta_kHz"] = rp->small_delta_kHz;
    j["omega_pi_kHz"] = rp->omega_pi_kHz;
    j["omega_sigma_kHz"] = rp->omega_sigma_kHz;
    j["duration_us"] = rp->duration_us;
    j["scattering_on"] = rp->scattering_on;
    return j;
  }
  if (const auto* pp = std::get_if<dyn::OpticalPump422>(&pulse)) {
    j["type"] = "pump_422";
    j["duration_us"] = pp->duration_us;
    j["repumper_on"] = pp->repumper_on;
    j["repumper_overhang_us"] = pp->repumper_overhang_us;
    return j;
  }
  const auto& pr = std::get<dyn::ProbePulse>(pulse);
  j["type"] = "probe";
  j["n_from"] = pr.n_from;
  j["n_to"] = pr.n_to;
  j["duration_us"] = pr.duration_us;
  return j;
}

seq::ScanSpec scan_spec_from_json(const ordered_json& j,
                                  const std::string& path) {
  check_keys(j, path, {"path", "values", "center", "half_span", "points"});
  seq::ScanSpec scan;
  scan.path = opt_string(j, path, "path", "");
  const ordered_json* values = find(j, "values");
  bool has_linspace = find(j, "center") || find(j, "half_span") ||
                      find(j, "points");
  if (values && has_linspace) {
    fail(path, "give either explicit values or center/half_span/points");
  }
  if (values) {
    scan.values = as_number_array(*values, path + ".values");
  } else if (has_linspace) {
    const ordered_json* c = find(j, "center");
    const ordered_json* h = find(j, "half_span");
    const ordered_json* p = find(j, "points");
    if (!c || !h || !p) {
      fail(path, "center, half_span and points must all be given");
    }
    double center = as_number(*c, path + ".center");
    double half = as_number(*h, path + ".half_span");
    int npts = as_int(*p, path + ".points");
    if (half < 0.0) fail(path + ".half_span", "must be >= 0");
    if (npts < 1) fail(path + ".points", "must be >= 1");
    scan.values = seq::linspace(center, half, npts);
  }
  if (scan.values.empty()) {
    fail(path + ".values", "empty scan list; give at least one point");
  }
  return scan;
}

seq::Observable observable_from_json(const ordered_json& j,
                                     const std::string& path) {
  check_keys(j, path, {"kind", "channel_n", "partner_n"});
  seq::Observable obs;
  std::string kind = opt_string(j, path, "kind", "channel");
  if (kind == "channel") {
    obs.kind = seq::ObservableKind::channel;
  } else if (kind == "normalized") {
    obs.kind = seq::ObservableKind::normalized;
  } else if (kind == "raman_ratio") {
    obs.kind = seq::ObservableKind::raman_ratio;
  } else {
    fail(path + ".kind",
         "unknown kind '" + kind +
             "'; valid kinds: channel, normalized, raman_ratio");
  }
  obs.channel_n = opt_int(j, path, "channel_n", 0);
  obs.partner_n = opt_int(j, path, "partner_n", 0);
  return obs;
}

std::string observable_kind_name(seq::ObservableKind k) {
  switch (k) {
    case seq::ObservableKind::channel: return "channel";
    case seq::ObservableKind::normalized: return "normalized";
    default: return "raman_ratio";
  }
}

// ---------------------------------------------------------------------------
// Jobs
// ---------------------------------------------------------------------------

ScanOverride scan_override_from_json(const ordered_json& j,
                                     const std::string& path) {
  check_keys(j, path, {"center", "half_span", "points", "values"});
  ScanOverride ov;
  if (const ordered_json* c = find(j, "center")) {
    ov.center = as_number(*c, path + ".center");
  }
  if (const ordered_json* h = find(j, "half_span")) {
    double v = as_number(*h, path + ".half_span");
    if (v < 0.0) fail(path + ".half_span", "must be >= 0");
    ov.half_span = v;
  }
  if (const ordered_json* p = find(j, "points")) {
    int v = as_int(*p, path + ".points");
    if (v < 1) fail(path + ".points", "must be >= 1");
    ov.points = v;
  }
  if (const ordered_json* v = find(j, "values")) {
    std::vector<double> vals = as_number_array(*v, path + ".values");
    if (vals.empty()) {
      fail(path + ".values", "empty scan list; give at least one point");
    }
    if (ov.center || ov.half_span || ov.points) {
      fail(path, "give either explicit values or center/half_span/points");
    }
    ov.values = std::move(vals);
  }
  return ov;
}

ordered_json scan_override_to_json(const ScanOverride& ov) {
  ordered_json j = ordered_json::object();
  if (ov.center) j["center"] = *ov.center;
  if (ov.half_span) j["half_span"] = *ov.half_span;
  if (ov.points) j["points"] = *ov.points;
  if (ov.values) j["values"] = *ov.values;
  return j;
}

Job job_from_json(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object, got " + type_name(j));
  Job job;
  const ordered_json* label = find(j, "label");
  if (!label) fail(path + ".label", "required field is missing");
  job.label = as_string(*label, path + ".label");
  if (job.label.empty()) fail(path + ".label", "must not be empty");
  for (char c : job.label) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
      fail(path + ".label",
           "'" + job.label +
               "' contains characters outside [A-Za-z0-9_-]; labels name "
               "output files");
    }
  }

  const ordered_json* preset = find(j, "preset");
  const ordered_json* inline_seq = find(j, "sequence");
  if (preset && inline_seq) {
    fail(path, "give either a preset or an inline sequence, not both");
  }
  if (!preset && !inline_seq) {
    fail(path, "one of 'preset' or 'sequence' is required");
  }

  if (inline_seq) {
    check_keys(j, path, {"label", "sequence"});
    job.inline_spec = sequence_from_json(*inline_seq, path + ".sequence");
    return job;
  }

  job.preset = as_string(*preset, path + ".preset");
  if (std::find(kPresets.begin(), kPresets.end(), job.preset) ==
      kPresets.end()) {
    fail(path + ".preset", "unknown preset '" + job.preset +
                               "'; valid presets: " + join(kPresets));
  }

  if (job.preset == "mw_spectroscopy") {
    check_keys(j, path, {"label", "preset", "variant", "scan"});
    job.mw_variant = opt_string(j, path, "variant", "no_pump");
    if (std::find(kMwVariants.begin(), kMwVariants.end(), job.mw_variant) ==
        kMwVariants.end()) {
      fail(path + ".variant", "unknown variant '" + job.mw_variant +
                                  "'; valid variants: " + join(kMwVariants));
    }
  } else if (job.preset == "raman_spectroscopy") {
    check_keys(j, path, {"label", "preset", "n", "duration_us", "power",
                         "scan"});
    job.raman_n = opt_int(j, path, "n", 51);
    job.raman_duration_us = opt_number(j, path, "duration_us", 17.0);
    job.raman_power = opt_number(j, path, "power", 1.0);
    if (job.raman_n < 2) fail(path + ".n", "must be >= 2");
    if (job.raman_duration_us <= 0.0) {
      fail(path + ".duration_us", "must be > 0");
    }
    if (job.raman_power <= 0.0) fail(path + ".power", "must be > 0");
  } else if (job.preset == "ramsey_switch") {
    check_keys(j, path,
               {"label", "preset", "raman_on", "raman_delta_kHz",
                "raman_power", "scan"});
    job.ramsey_raman_on = opt_bool(j, path, "raman_on", false);
    if (const ordered_json* d = find(j, "raman_delta_kHz")) {
      job.ramsey_delta_kHz = as_number(*d, path + ".raman_delta_kHz");
    }
    job.ramsey_power = opt_number(j, path, "raman_power", 1.0);
    if (job.ramsey_raman_on && job.ramsey_power <= 0.0) {
      fail(path + ".raman_power", "must be > 0 when the pulse is enabled");
    }
  } else {  // purification_filter
    check_keys(j, path, {"label", "preset", "start_in_4d", "scan"});
    job.filter_start_in_4d = opt_bool(j, path, "start_in_4d", false);
  }

  if (const ordered_json* scan = find(j, "scan")) {
    job.scan = scan_override_from_json(*scan, path + ".scan");
  }
  return job;
}

ordered_json job_to_json(const Job& job) {
  ordered_json j;
  j["label"] = job.label;
  if (job.inline_spec) {
    j["sequence"] = sequence_to_json(*job.inline_spec);
    return j;
  }
  j["preset"] = job.preset;
  if (job.preset == "mw_spectroscopy") {
    j["variant"] = job.mw_variant;
  } else if (job.preset == "raman_spectroscopy") {
    j["n"] = job.raman_n;
    j["duration_us"] = job.raman_duration_us;
    j["power"] = job.raman_power;
  } else if (job.preset == "ramsey_switch") {
    j["raman_on"] = job.ramsey_raman_on;
    if (job.ramsey_delta_kHz) j["raman_delta_kHz"] = *job.ramsey_delta_kHz;
    if (job.ramsey_raman_on) j["raman_power"] = job.ramsey_power;
  } else {
    j["start_in_4d"] = job.filter_start_in_4d;
  }
  if (!job.scan.empty()) j["scan"] = scan_override_to_json(job.scan);
  return j;
}

void apply_scan_override(seq::ScanSpec& scan, const ScanOverride& ov,
                         const std::string& path) {
  if (ov.empty()) return;
  if (ov.values) {
    scan.values = *ov.values;
    return;
  }
  if (scan.values.empty()) {
    fail(path, "preset has no scan to override");
  }
  double center = ov.center ? *ov.center
                            : 0.5 * (scan.values.front() + scan.values.back());
  double half = ov.half_span
                    ? *ov.half_span
                    : 0.5 * (scan.values.back() - scan.values.front());
  int npts = ov.points ? *ov.points : static_cast<int>(scan.values.size());
  scan.values = seq::linspace(center, half, npts);
}

// ---------------------------------------------------------------------------
// Parse-position diagnostics
// ---------------------------------------------------------------------------

std::pair<int, int> line_column_of(const std::string& text, size_t byte) {
  int line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

// ---------------------------------------------------------------------------
// Sequence (de)serialization
// ---------------------------------------------------------------------------

seq::SequenceSpec sequence_from_json(const ordered_json& j,
                                     const std::string& path) {
  check_keys(j, path,
             {"id", "basis_manifolds", "initial", "steps", "observable",
              "scan", "shots_per_point", "jitter_sigma_kHz", "pump_leak_5s",
              "pump_loss_other", "probe_mj32", "probe_mj12",
              "raman_transfer_channel"});
  seq::SequenceSpec spec;
  spec.id = opt_string(j, path, "id", "inline");

  const ordered_json* manifolds = find(j, "basis_manifolds");
  if (!manifolds) fail(path + ".basis_manifolds", "required field is missing");
  if (!manifolds->is_array() || manifolds->empty()) {
    fail(path + ".basis_manifolds", "expected a non-empty array of manifolds");
  }
  for (size_t i = 0; i < manifolds->size(); ++i) {
    spec.basis_manifolds.push_back(as_int(
        (*manifolds)[i], path + ".basis_manifolds[" + std::to_string(i) + "]"));
  }

  const ordered_json* initial = find(j, "initial");
  if (!initial) fail(path + ".initial", "required field is missing");
  check_keys(*initial, path + ".initial", {"components", "bg_fraction"});
  const ordered_json* comps = find(*initial, "components");
  if (!comps || !comps->is_array() || comps->empty()) {
    fail(path + ".initial.components",
         "expected a non-empty array of {level, weight} entries");
  }
  for (size_t i = 0; i < comps->size(); ++i) {
    std::string cpath =
        path + ".initial.components[" + std::to_string(i) + "]";
    const ordered_json& c = (*comps)[i];
    check_keys(c, cpath, {"level", "weight"});
    const ordered_json* level = find(c, "level");
    if (!level) fail(cpath + ".level", "required field is missing");
    const ordered_json* weight = find(c, "weight");
    if (!weight) fail(cpath + ".weight", "required field is missing");
    double w = as_number(*weight, cpath + ".weight");
    if (w < 0.0) fail(cpath + ".weight", "must be >= 0");
    spec.initial.components.emplace_back(
        level_from_json(*level, cpath + ".level"), w);
  }
  spec.initial.bg_fraction =
      opt_number(*initial, path + ".initial", "bg_fraction", 0.0);
  if (spec.initial.bg_fraction < 0.0 || spec.initial.bg_fraction >= 1.0) {
    fail(path + ".initial.bg_fraction", "must be in [0, 1)");
  }

  const ordered_json* steps = find(j, "steps");
  if (!steps) fail(path + ".steps", "required field is missing");
  if (!steps->is_array() || steps->empty()) {
    fail(path + ".steps", "expected a non-empty array of steps");
  }
  for (size_t i = 0; i < steps->size(); ++i) {
    std::string spath = path + ".steps[" + std::to_string(i) + "]";
    const ordered_json& s = (*steps)[i];
    check_keys(s, spath, {"delay_before_us", "pulse"});
    dyn::Step step;
    step.delay_before_us = opt_number(s, spath, "delay_before_us", 0.0);
    if (step.delay_before_us < 0.0) {
      fail(spath + ".delay_before_us", "must be >= 0");
    }
    const ordered_json* pulse = find(s, "pulse");
    if (!pulse) fail(spath + ".pulse", "required field is missing");
    step.pulse = pulse_from_json(*pulse, spath + ".pulse");
    spec.steps.push_back(std::move(step));
  }

  const ordered_json* obs = find(j, "observable");
  if (!obs) fail(path + ".observable", "required field is missing");
  spec.observable = observable_from_json(*obs, path + ".observable");

  const ordered_json* scan = find(j, "scan");
  if (!scan) fail(path + ".scan", "required field is missing");
  spec.scan = scan_spec_from_json(*scan, path + ".scan");

  spec.shots_per_point = opt_int(j, path, "shots_per_point", 0);
  if (spec.shots_per_point < 0) fail(path + ".shots_per_point", "must be >= 0");
  spec.jitter_sigma_kHz = opt_number(j, path, "jitter_sigma_kHz", 0.0);
  if (spec.jitter_sigma_kHz < 0.0) {
    fail(path + ".jitter_sigma_kHz", "must be >= 0");
  }
  spec.pump_leak_5s = opt_number(j, path, "pump_leak_5s", 0.0);
  spec.pump_loss_other = opt_number(j, path, "pump_loss_other", 0.0);
  if (spec.pump_leak_5s < 0.0 || spec.pump_loss_other < 0.0 ||
      spec.pump_leak_5s + spec.pump_loss_other > 1.0) {
    fail(path, "pump_leak_5s and pump_loss_other must be >= 0 and sum to <= 1");
  }
  if (const ordered_json* p = find(j, "probe_mj32")) {
    spec.probe_mj32 = microwave_from_json(*p, path + ".probe_mj32");
  }
  if (const ordered_json* p = find(j, "probe_mj12")) {
    spec.probe_mj12 = microwave_from_json(*p, path + ".probe_mj12");
  }
  spec.raman_transfer_channel = opt_int(j, path, "raman_transfer_channel", 0);
  return spec;
}

nlohmann::ordered_json sequence_to_json(const seq::SequenceSpec& spec) {
  ordered_json j;
  j["id"] = spec.id;
  j["basis_manifolds"] = spec.basis_manifolds;
  ordered_json comps = ordered_json::array();
  for (const auto& [level, weight] : spec.initial.components) {
    comps.push_back({{"level", level_to_json(level)}, {"weight", weight}});
  }
  j["initial"] = {{"components", comps},
                  {"bg_fraction", spec.initial.bg_fraction}};
  ordered_json steps = ordered_json::array();
  for (const auto& step : spec.steps) {
    steps.push_back({{"delay_before_us", step.delay_before_us},
                     {"pulse", pulse_to_json(step.pulse)}});
  }
  j["steps"] = steps;
  j["observable"] = {{"kind", observable_kind_name(spec.observable.kind)},
                     {"channel_n", spec.observable.channel_n},
                     {"partner_n", spec.observable.partner_n}};
  j["scan"] = {{"path", spec.scan.path}, {"values", spec.scan.values}};
  if (spec.jitter_sigma_kHz != 0.0) {
    j["jitter_sigma_kHz"] = spec.jitter_sigma_kHz;
  }
  if (spec.pump_leak_5s != 0.0) j["pump_leak_5s"] = spec.pump_leak_5s;
  if (spec.pump_loss_other != 0.0) {
    j["pump_loss_other"] = spec.pump_loss_other;
  }
  if (spec.probe_mj32) j["probe_mj32"] = microwave_to_json(*spec.probe_mj32);
  if (spec.probe_mj12) j["probe_mj12"] = microwave_to_json(*spec.probe_mj12);
  if (spec.raman_transfer_channel != 0) {
    j["raman_transfer_channel"] = spec.raman_transfer_channel;
  }
  return j;
}

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

seq::ModelBundle RunConfig::bundle() const {
  seq::ModelBundle b;
  b.shift = shift;
  b.pump = pump;
  for (const auto& e : nu0_entries) {
    b.nu0.set(static_cast<int>(e[0]), static_cast<int>(e[1]), e[2]);
  }
  return b;
}

RunConfig config_from_json(const ordered_json& j, const std::string& origin) {
  if (!j.is_object()) {
    throw ConfigError(origin + ": top level must be an object");
  }
  check_keys(j, origin,
             {"name", "description", "model", "pump", "imperfections",
              "shots_per_point", "seed", "out_dir", "jobs", "analysis",
              "sigma_C_kHz"});
  RunConfig cfg;
  cfg.name = opt_string(j, origin, "name", "");
  cfg.description = opt_string(j, origin, "description", "");

  if (const ordered_json* model = find(j, "model")) {
    std::string mpath = origin + ".model";
    check_keys(*model, mpath,
               {"mode", "theta", "dipole_C_kHz", "reference_n", "B_kHz",
                "nu0_GHz"});
    cfg.shift.mode = mode_from_string(
        opt_string(*model, mpath, "mode", "exact_hydrogenic"), mpath + ".mode");
    cfg.shift.theta = opt_number(*model, mpath, "theta", cfg.shift.theta);
    if (cfg.shift.theta <= 0.0) fail(mpath + ".theta", "must be > 0");
    cfg.shift.dipole_C_kHz =
        opt_number(*model, mpath, "dipole_C_kHz", cfg.shift.dipole_C_kHz);
    cfg.shift.reference_n =
        opt_int(*model, mpath, "reference_n", cfg.shift.reference_n);
    if (cfg.shift.reference_n < 2) fail(mpath + ".reference_n", "must be >= 2");
    cfg.shift.B_kHz = opt_number(*model, mpath, "B_kHz", cfg.shift.B_kHz);
    if (const ordered_json* nu0 = find(*model, "nu0_GHz")) {
      if (!nu0->is_array()) {
        fail(mpath + ".nu0_GHz", "expected an array of [n_a, n_b, GHz]");
      }
      for (size_t i = 0; i < nu0->size(); ++i) {
        std::string epath = mpath + ".nu0_GHz[" + std::to_string(i) + "]";
        std::vector<double> entry = as_number_array((*nu0)[i], epath);
        if (entry.size() != 3) fail(epath, "expected [n_a, n_b, GHz]");
        if (entry[0] < 2 || entry[1] < 2 ||
            entry[0] != std::floor(entry[0]) ||
            entry[1] != std::floor(entry[1])) {
          fail(epath, "manifold labels must be integers >= 2");
        }
        if (entry[2] <= 0.0) fail(epath, "frequency must be > 0");
        cfg.nu0_entries.push_back({entry[0], entry[1], entry[2]});
      }
    }
  }

  if (const ordered_json* pump = find(j, "pump")) {
    std::string ppath = origin + ".pump";
    check_keys(*pump, ppath,
               {"gamma_p_MHz", "drive_422_per_us", "drive_1092_per_us"});
    cfg.pump.gamma_p_MHz =
        opt_number(*pump, ppath, "gamma_p_MHz", cfg.pump.gamma_p_MHz);
    cfg.pump.drive_422_per_us = opt_number(*pump, ppath, "drive_422_per_us",
                                           cfg.pump.drive_422_per_us);
    cfg.pump.drive_1092_per_us = opt_number(
        *pump, ppath, "drive_1092_per_us", cfg.pump.drive_1092_per_us);
    if (cfg.pump.gamma_p_MHz <= 0.0) fail(ppath + ".gamma_p_MHz", "must be > 0");
    if (cfg.pump.drive_422_per_us < 0.0 || cfg.pump.drive_1092_per_us < 0.0) {
      fail(ppath, "drive rates must be >= 0");
    }
  }

  if (const ordered_json* imp = find(j, "imperfections")) {
    std::string ipath = origin + ".imperfections";
    check_keys(*imp, ipath,
               {"pump_leak_5s", "pump_loss_other", "detection_bg",
                "mw_jitter_sigma_kHz"});
    cfg.imperfections.pump_leak_5s = opt_number(
        *imp, ipath, "pump_leak_5s", cfg.imperfections.pump_leak_5s);
    cfg.imperfections.pump_loss_other = opt_number(
        *imp, ipath, "pump_loss_other", cfg.imperfections.pump_loss_other);
    cfg.imperfections.detection_bg = opt_number(
        *imp, ipath, "detection_bg", cfg.imperfections.detection_bg);
    cfg.imperfections.mw_jitter_sigma_kHz =
        opt_number(*imp, ipath, "mw_jitter_sigma_kHz",
                   cfg.imperfections.mw_jitter_sigma_kHz);
    if (cfg.imperfections.pump_leak_5s < 0.0 ||
        cfg.imperfections.pump_loss_other < 0.0 ||
        cfg.imperfections.pump_leak_5s + cfg.imperfections.pump_loss_other >
            1.0) {
      fail(ipath,
           "pump_leak_5s and pump_loss_other must be >= 0 and sum to <= 1");
    }
    if (cfg.imperfections.detection_bg < 0.0 ||
        cfg.imperfections.detection_bg >= 1.0) {
      fail(ipath + ".detection_bg", "must be in [0, 1)");
    }
    if (cfg.imperfections.mw_jitter_sigma_kHz < 0.0) {
      fail(ipath + ".mw_jitter_sigma_kHz", "must be >= 0");
    }
  }

  cfg.shots_per_point = opt_int(j, origin, "shots_per_point", 0);
  if (cfg.shots_per_point < 0) {
    fail(origin + ".shots_per_point", "must be >= 0");
  }
  if (const ordered_json* seed = find(j, "seed")) {
    if (!seed->is_number_integer() ||
        (seed->is_number_integer() && !seed->is_number_unsigned() &&
         seed->get<long long>() < 0)) {
      fail(origin + ".seed", "expected a non-negative integer");
    }
    cfg.seed = seed->get<std::uint64_t>();
  }
  cfg.out_dir = opt_string(j, origin, "out_dir", "");

  const ordered_json* jobs = find(j, "jobs");
  if (!jobs) fail(origin + ".jobs", "required field is missing");
  if (!jobs->is_array()) {
    fail(origin + ".jobs", "expected an array of jobs");
  }
  if (jobs->empty()) {
    fail(origin + ".jobs", "at least one job is required");
  }
  for (size_t i = 0; i < jobs->size(); ++i) {
    cfg.jobs.push_back(
        job_from_json((*jobs)[i], origin + ".jobs[" + std::to_string(i) + "]"));
  }

  cfg.analysis = opt_string(j, origin, "analysis", "none");
  if (std::find(kAnalyses.begin(), kAnalyses.end(), cfg.analysis) ==
      kAnalyses.end()) {
    fail(origin + ".analysis", "unknown analysis '" + cfg.analysis +
                                   "'; valid analyses: " + join(kAnalyses));
  }
  cfg.sigma_C_kHz = opt_number(j, origin, "sigma_C_kHz", 1.0);
  if (cfg.sigma_C_kHz < 0.0) fail(origin + ".sigma_C_kHz", "must be >= 0");
  return cfg;
}

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    auto [line, col] = line_column_of(text, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream msg;
    msg << origin << ":" << line << ":" << col << ": " << e.what();
    throw ConfigError(msg.str());
  }
  return config_from_json(j, origin);
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json j;
  if (!cfg.name.empty()) j["name"] = cfg.name;
  if (!cfg.description.empty()) j["description"] = cfg.description;
  ordered_json model;
  model["mode"] = mode_to_string(cfg.shift.mode);
  model["theta"] = cfg.shift.theta;
  model["dipole_C_kHz"] = cfg.shift.dipole_C_kHz;
  model["reference_n"] = cfg.shift.reference_n;
  if (cfg.shift.mode == core::ShiftMode::power_law) {
    model["B_kHz"] = cfg.shift.B_kHz;
  }
  if (!cfg.nu0_entries.empty()) {
    ordered_json nu0 = ordered_json::array();
    for (const auto& e : cfg.nu0_entries) {
      nu0.push_back({static_cast<int>(e[0]), static_cast<int>(e[1]), e[2]});
    }
    model["nu0_GHz"] = nu0;
  }
  j["model"] = model;
  j["pump"] = {{"gamma_p_MHz", cfg.pump.gamma_p_MHz},
               {"drive_422_per_us", cfg.pump.drive_422_per_us},
               {"drive_1092_per_us", cfg.pump.drive_1092_per_us}};
  j["imperfections"] = {
      {"pump_leak_5s", cfg.imperfections.pump_leak_5s},
      {"pump_loss_other", cfg.imperfections.pump_loss_other},
      {"detection_bg", cfg.imperfections.detection_bg},
      {"mw_jitter_sigma_kHz", cfg.imperfections.mw_jitter_sigma_kHz}};
  j["shots_per_point"] = cfg.shots_per_point;
  if (cfg.seed) j["seed"] = *cfg.seed;
  if (!cfg.out_dir.empty()) j["out_dir"] = cfg.out_dir;
  ordered_json jobs = ordered_json::array();
  for (const Job& job : cfg.jobs) jobs.push_back(job_to_json(job));
  j["jobs"] = jobs;
  j["analysis"] = cfg.analysis;
  if (cfg.analysis == "theta_extraction") {
    j["sigma_C_kHz"] = cfg.sigma_C_kHz;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Sequence construction and validation
// ---------------------------------------------------------------------------

seq::SequenceSpec build_job_sequence(const Job& job, const RunConfig& cfg,
                                     bool resolve_delta,
                                     double* resolved_delta_kHz) {
  seq::ModelBundle bundle = cfg.bundle();
  seq::SequenceSpec spec;
  if (job.inline_spec) {
    spec = *job.inline_spec;
  } else if (job.preset == "mw_spectroscopy") {
    seq::MwVariant variant =
        job.mw_variant == "no_pump" ? seq::MwVariant::no_pump
        : job.mw_variant == "pump"  ? seq::MwVariant::pump
                                    : seq::MwVariant::pump_plus_repump;
    spec = seq::preset_mw_spectroscopy(variant, bundle, cfg.imperfections);
  } else if (job.preset == "raman_spectroscopy") {
    spec = seq::preset_raman_spectroscopy(job.raman_n, job.raman_duration_us,
                                          job.raman_power, bundle,
                                          cfg.imperfections);
  } else if (job.preset == "ramsey_switch") {
    double delta = 0.0;
    if (job.ramsey_raman_on) {
      if (job.ramsey_delta_kHz) {
        delta = *job.ramsey_delta_kHz;
      } else if (resolve_delta) {
        delta = seq::find_delta_star(bundle, job.ramsey_power);
      } else {
        // Structure-only placeholder: the class splitting is always within
        // the searchable neighbourhood of the true phase-flip detuning.
        delta = core::total_delta_kHz(bundle.shift, 49);
      }
    }
    if (resolved_delta_kHz) *resolved_delta_kHz = delta;
    spec = seq::preset_ramsey_switch(job.ramsey_raman_on, delta, bundle,
                                     cfg.imperfections, job.ramsey_power);
  } else if (job.preset == "purification_filter") {
    spec = seq::preset_purification_filter(job.filter_start_in_4d, bundle,
                                           cfg.imperfections);
  } else {
    throw ConfigError("job '" + job.label + "': unknown preset '" +
                      job.preset + "'");
  }
  if (!job.inline_spec) {
    apply_scan_override(spec.scan, job.scan, "jobs." + job.label + ".scan");
  }
  spec.shots_per_point = cfg.shots_per_point;
  return spec;
}

namespace {

void check_analysis_jobs(const RunConfig& cfg) {
  const std::string& a = cfg.analysis;
  auto all_preset = [&](const std::string& name) {
    return std::all_of(cfg.jobs.begin(), cfg.jobs.end(),
                       [&](const Job& j) { return j.preset == name; });
  };
  if (a == "three_step") {
    if (cfg.jobs.size() != 3 || !all_preset("mw_spectroscopy") ||
        cfg.jobs[0].mw_variant != "no_pump" ||
        cfg.jobs[1].mw_variant != "pump" ||
        cfg.jobs[2].mw_variant != "pump_plus_repump") {
      throw ConfigError(
          "analysis three_step: needs exactly three mw_spectroscopy jobs "
          "with variants no_pump, pump, pump_plus_repump in that order");
    }
  } else if (a == "raman_lines") {
    if (cfg.jobs.empty() || !all_preset("raman_spectroscopy")) {
      throw ConfigError(
          "analysis raman_lines: every job must use the raman_spectroscopy "
          "preset");
    }
  } else if (a == "theta_extraction") {
    if (cfg.jobs.size() < 2 || !all_preset("raman_spectroscopy")) {
      throw ConfigError(
          "analysis theta_extraction: needs at least two raman_spectroscopy "
          "jobs");
    }
    std::map<int, std::set<double>> powers;
    for (const Job& j : cfg.jobs) powers[j.raman_n].insert(j.raman_power);
    for (const auto& [n, p] : powers) {
      if (p.size() < 2) {
        throw ConfigError(
            "analysis theta_extraction: n=" + std::to_string(n) +
            " needs at least two distinct beam powers to extrapolate");
      }
    }
  } else if (a == "fringe_pair") {
    if (cfg.jobs.size() != 2 || !all_preset("ramsey_switch") ||
        cfg.jobs[0].ramsey_raman_on || !cfg.jobs[1].ramsey_raman_on) {
      throw ConfigError(
          "analysis fringe_pair: needs exactly two ramsey_switch jobs, the "
          "first with raman_on=false and the second with raman_on=true");
    }
  } else if (a == "filter_report") {
    if (cfg.jobs.size() != 2 || !all_preset("purification_filter") ||
        cfg.jobs[0].filter_start_in_4d || !cfg.jobs[1].filter_start_in_4d) {
      throw ConfigError(
          "analysis filter_report: needs exactly two purification_filter "
          "jobs, the first with start_in_4d=false and the second with "
          "start_in_4d=true");
    }
  } else if (a == "phase_scan") {
    if (cfg.jobs.size() < 2 || !all_preset("ramsey_switch") ||
        cfg.jobs[0].ramsey_raman_on) {
      throw ConfigError(
          "analysis phase_scan: needs one ramsey_switch job with "
          "raman_on=false followed by at least one with raman_on=true");
    }
    for (size_t i = 1; i < cfg.jobs.size(); ++i) {
      if (!cfg.jobs[i].ramsey_raman_on) {
        throw ConfigError(
            "analysis phase_scan: every job after the first must have "
            "raman_on=true");
      }
    }
  } else if (a == "time_rabi") {
    for (const Job& j : cfg.jobs) {
      if (!j.inline_spec) {
        throw ConfigError(
            "analysis time_rabi: jobs must be inline sequences scanning a "
            "pulse duration");
      }
      if (j.inline_spec->scan.path.find("duration") == std::string::npos) {
        throw ConfigError("analysis time_rabi: job '" + j.label +
                          "' does not scan a pulse duration");
      }
    }
  }
}

}  // namespace

void validate_config(const RunConfig& cfg) {
  if (cfg.shots_per_point > 0 && !cfg.seed) {
    throw ConfigError("seed: required when shots_per_point > 0");
  }
  std::set<std::string> labels;
  for (const Job& job : cfg.jobs) {
    if (!labels.insert(job.label).second) {
      throw ConfigError("jobs: duplicate label '" + job.label + "'");
    }
  }
  check_analysis_jobs(cfg);
  seq::ModelBundle bundle = cfg.bundle();
  for (size_t i = 0; i < cfg.jobs.size(); ++i) {
    try {
      seq::SequenceSpec spec =
          build_job_sequence(cfg.jobs[i], cfg, /*resolve_delta=*/false);
      seq::validate_sequence(spec, bundle);
    } catch (const ConfigError& e) {
      throw ConfigError("jobs[" + std::to_string(i) + "] ('" +
                        cfg.jobs[i].label + "'): " + e.what());
    } catch (const std::exception& e) {
      throw ConfigError("jobs[" + std::to_string(i) + "] ('" +
                        cfg.jobs[i].label + "'): " + e.what());
    }
  }
}

const std::vector<std::string>& known_presets() { return kPresets; }
const std::vector<std::string>& known_analyses() { return kAnalyses; }

}  // namespace circsim::cli
