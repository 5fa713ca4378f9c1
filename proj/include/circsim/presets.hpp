#pragma once

#include <vector>

#include "circsim/sequences.hpp"

namespace circsim::seq {

// Experimental non-idealities applied by the shipped sequence presets.
// ideal() turns them all off for clean model checks. The jitter default is
// calibrated so the fitted reference-line width comes out at the observed
// 78 kHz (the 15 us probe alone gives 21 kHz).
struct Imperfections {
  double pump_leak_5s = 0.10;
  double pump_loss_other = 0.0;
  double detection_bg = 0.10;
  double mw_jitter_sigma_kHz = 68.2;
  static Imperfections ideal() { return {0.0, 0.0, 0.0, 0.0}; }
};

std::vector<double> linspace(double center, double half_span, int npts);

enum class MwVariant { no_pump, pump, pump_plus_repump };

// Two-photon microwave spectroscopy of the 51c -> 49c line, with or without
// the optical pumping stages; scans the source frequency, reads channel 49.
SequenceSpec preset_mw_spectroscopy(MwVariant variant,
                                    const ModelBundle& bundle,
                                    const Imperfections& imp);

// Light shifts of the two core-state classes for the Raman pulse of the
// given nominal pi-pulse duration and beam power scale.
struct RamanSettings {
  double omega_pi_kHz = 0.0;
  double omega_sigma_kHz = 0.0;
  double rabi_kHz = 0.0;           // two-photon Rabi frequency
  double resonance_kHz = 0.0;      // light-shifted resonance of the scan home
};

RamanSettings raman_settings_for(int n, double pulse_duration_us,
                                 double power_scale,
                                 const ModelBundle& bundle);

// Pump, Raman pulse scanning its two-photon detuning, then two core-state
// selective microwave probes; observable is the transfer ratio
// pi_1/2 / (pi_3/2 + pi_1/2).
SequenceSpec preset_raman_spectroscopy(int n_init, double pulse_duration_us,
                                       double power_scale,
                                       const ModelBundle& bundle,
                                       const Imperfections& imp);

// Ramsey interferometer on 51c -> 49c with the purification filter, an
// optional closed Raman 2*pi pulse between the pi/2 pulses, and a 51c -> 53c
// detection probe; scans the shared microwave source.
SequenceSpec preset_ramsey_switch(bool raman_on, double raman_delta_kHz,
                                  const ModelBundle& bundle,
                                  const Imperfections& imp,
                                  double raman_power = 1.0);

// The purification filter alone: two pi/2 pulses on 51c -> 50c separated by
// exactly one beat period of the two core-state classes, then the detection
// probe; scans the filter source, reads the transferred fraction.
SequenceSpec preset_purification_filter(bool start_in_4d,
                                        const ModelBundle& bundle,
                                        const Imperfections& imp);

// Detuning of the inserted Raman pulse that flips the Ramsey fringe phase by
// exactly pi. pulse_power scales the closed-pulse Rabi frequency (1 = the
// geometry where the generalized Rabi frequency on the detuned manifold is
// twice the resonant one).
double find_delta_star(const ModelBundle& bundle, double pulse_power);

}  // namespace circsim::seq
