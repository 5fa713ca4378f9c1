#pragma once

#include <variant>

namespace circsim::dyn {

// Drive on the circular-circular transition n_lo <-> n_hi (all core states in
// parallel). `source_freq_GHz` is the synthesizer frequency; when
// `two_photon` is set the effective drive frequency is twice the source (the
// photon pair bridges the two-manifold gap) while `rabi_kHz` is already the
// effective two-photon Rabi frequency. `use_shared_source` marks the pulse as
// fed by the sequence's common synthesizer so that scans of the shared source
// retune every such pulse together.
struct MicrowavePulse {
  int n_hi = 0;
  int n_lo = 0;
  bool two_photon = true;
  double source_freq_GHz = 0.0;
  double rabi_kHz = 0.0;
  double duration_us = 0.0;
  bool use_shared_source = false;
};

// Two-beam optical Raman drive on the 4d core spin within every manifold:
// a pi-polarized beam (Rabi omega_pi at the 4d->5p leg) and an orthogonal
// sigma beam contributing equal sigma+ and sigma- components of Rabi
// omega_sigma each, both detuned by big_delta from the 4d->5p line.
// small_delta is the beam frequency difference (pi minus sigma), resonant
// with the |mj|=3/2 -> |mj|=1/2 splitting when it matches the level
// splitting plus the differential light shift. With `scattering_on` the
// off-resonant photon scattering through 5p is included as jump operators
// (correlated across manifolds: an emitted photon carries no n information).
struct RamanPulse {
  double big_delta_GHz = 0.65;
  double small_delta_kHz = 0.0;
  double omega_pi_kHz = 0.0;
  double omega_sigma_kHz = 0.0;
  double duration_us = 0.0;
  bool scattering_on = true;
};

// Core-state preparation by incoherent optical pumping: a 422 nm beam
// (isotropic polarization mix) empties 5s through 5p into the 4d sublevels;
// with `repumper_on` a pi-polarized 1092 nm beam runs alongside and then for
// `repumper_overhang_us` afterwards, recycling |mj|=1/2 so that everything
// accumulates in the pi-dark |mj|=3/2 pair. Rate-equation model; any pump
// activity destroys coherences.
struct OpticalPump422 {
  double duration_us = 0.0;
  bool repumper_on = true;
  double repumper_overhang_us = 0.0;
};

// Idealized detection helper: a final microwave pi pulse that relabels the
// whole circular population of manifold n_from into n_to just before state
// readout, separating it from contaminant (sink) counts in channel n_from.
// Must be the last step of a sequence.
struct ProbePulse {
  int n_from = 0;
  int n_to = 0;
  double duration_us = 0.0;
};

using PulseSpec =
    std::variant<MicrowavePulse, RamanPulse, OpticalPump422, ProbePulse>;

// One timeline entry: a gap (from the end of the previous pulse to the start
// of this one) followed by the pulse itself.
struct Step {
  double delay_before_us = 0.0;
  PulseSpec pulse;
};

}  // namespace circsim::dyn
