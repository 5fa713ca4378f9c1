#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "circsim/atomic_core.hpp"
#include "circsim/basis.hpp"
#include "circsim/dataset.hpp"
#include "circsim/pulses.hpp"
#include "circsim/pump.hpp"
#include "circsim/state.hpp"

namespace circsim::seq {

// Everything a sequence needs to know about the physical model: level
// shifts, bare transition frequencies, and optical pumping rates.
struct ModelBundle {
  core::ShiftModel shift;
  core::Nu0Table nu0 = core::default_nu0_table();
  dyn::PumpRates pump;
};

// Diagonal initial mixture plus a fraction of undetectable background that
// starts in the sink level (spurious atoms that ride along in the home
// channel but never respond to the drives).
struct InitialState {
  std::vector<std::pair<core::CompositeLevel, double>> components;
  double bg_fraction = 0.0;
};

struct ScanSpec {
  // "steps[K].<field>" addresses a numeric field of the K-th step's pulse;
  // "shared.source_freq" addresses the source frequency of every microwave
  // pulse flagged use_shared_source. An empty path scans nothing (the axis
  // is recorded but every point runs the same sequence).
  std::string path;
  std::vector<double> values;
};

enum class ObservableKind {
  channel,      // raw population of one detection channel
  normalized,   // channel_n / (channel_n + partner_n)
  raman_ratio,  // two sub-runs with core-state selective probes
};

struct Observable {
  ObservableKind kind = ObservableKind::channel;
  int channel_n = 0;  // channel (or ratio numerator)
  int partner_n = 0;  // normalization partner
  std::string name() const;
};

struct SequenceSpec {
  std::string id;
  std::vector<int> basis_manifolds;  // home manifold first
  InitialState initial;
  std::vector<dyn::Step> steps;
  Observable observable;
  ScanSpec scan;
  int shots_per_point = 0;  // 0 = noiseless expectation values
  // Gaussian rms frequency jitter of the scanned microwave source, in kHz of
  // the effective (photon-number times source) frequency. Applied as a
  // deterministic Gauss-Hermite average, and only when the scan actually
  // targets a microwave source frequency.
  double jitter_sigma_kHz = 0.0;
  // Pumping imperfection applied after a repumped optical pump: a fraction
  // of the 4d population leaks back to 5s, another is lost outright.
  double pump_leak_5s = 0.0;
  double pump_loss_other = 0.0;
  // Core-state selective probes for the raman_ratio observable: one run
  // appends probe_mj32, the other probe_mj12; the ratio uses the population
  // transferred into raman_transfer_channel.
  std::optional<dyn::MicrowavePulse> probe_mj32;
  std::optional<dyn::MicrowavePulse> probe_mj12;
  int raman_transfer_channel = 0;
};

// Channel populations keyed by detected manifold label. The sink counts in
// the home channel (background that never left it); a detection probe
// relabels the circular population of one manifold into another channel.
struct DetectionRecord {
  std::map<int, double> channel;
  double channel_or_zero(int n) const;
};

// Nodes for averaging a function over a unit normal variable:
// E[f(sigma X)] ~ sum_k weight_k * f(sigma * offset_k), weights sum to 1.
std::vector<std::pair<double, double>> gauss_hermite_unit(int n);

DetectionRecord detect(const dyn::QuantumState& state,
                       const std::optional<dyn::ProbePulse>& probe);

std::vector<std::string> valid_scan_paths(const SequenceSpec& spec);

// Throws ConfigError with the list of valid paths when the path is unknown.
void apply_scan_value(std::vector<dyn::Step>& steps, const std::string& path,
                      double value);

void validate_sequence(const SequenceSpec& spec, const ModelBundle& bundle);

SpectrumDataset run_sequence(const SequenceSpec& spec,
                             const ModelBundle& bundle,
                             std::uint64_t rng_seed);

}  // namespace circsim::seq
