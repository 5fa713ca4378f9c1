#include "circsim/presets.hpp"

#include <cmath>
#include <sstream>

#include "circsim/errors.hpp"
#include "circsim/propagator.hpp"

namespace circsim::seq {

namespace {

core::CompositeLevel circ(int n, core::CoreTerm term, int two_mj) {
  return {{n, core::RydbergKind::circular}, {term, two_mj}};
}

InitialState split_5s(double bg) {
  InitialState init;
  init.components = {{circ(51, core::CoreTerm::s5_half, -1), 0.5},
                     {circ(51, core::CoreTerm::s5_half, +1), 0.5}};
  init.bg_fraction = bg;
  return init;
}

// pi/2 area in `duration` us: effective Rabi * duration = 1/4 cycle.
double half_pi_rabi_kHz(double duration_us) { return 250.0 / duration_us; }

// pi area in `duration` us.
double pi_rabi_kHz(double duration_us) { return 500.0 / duration_us; }

dyn::MicrowavePulse class_probe(int n_a, int n_b, int two_mj,
                                const ModelBundle& bundle) {
  int hi = std::max(n_a, n_b), lo = std::min(n_a, n_b);
  double nu = core::transition_frequency_GHz(
      circ(hi, core::CoreTerm::d4_threehalf, two_mj),
      circ(lo, core::CoreTerm::d4_threehalf, two_mj), bundle.shift,
      bundle.nu0);
  dyn::MicrowavePulse p;
  p.n_hi = hi;
  p.n_lo = lo;
  p.two_photon = true;
  p.source_freq_GHz = 0.5 * nu;
  p.rabi_kHz = pi_rabi_kHz(15.0);
  p.duration_us = 15.0;
  return p;
}

}  // namespace

std::vector<double> linspace(double center, double half_span, int npts) {
  std::vector<double> out;
  out.reserve(npts);
  if (npts == 1) {
    out.push_back(center);
    return out;
  }
  for (int i = 0; i < npts; ++i) {
    out.push_back(center - half_span +
                  2.0 * half_span * i / static_cast<double>(npts - 1));
  }
  return out;
}

RamanSettings raman_settings_for(int n, double pulse_duration_us,
                                 double power_scale,
                                 const ModelBundle& bundle) {
  if (pulse_duration_us <= 0.0) {
    throw ConfigError("raman pulse duration must be > 0");
  }
  if (power_scale < 0.0) {
    throw ConfigError("raman power scale must be >= 0");
  }
  RamanSettings s;
  double rabi_nominal_kHz = 500.0 / pulse_duration_us;
  double big_delta_kHz = 0.65 * 1e6;
  // Beam amplitude ratio fixed at omega_pi^2 = 1.3 * omega_sigma^2; power
  // scales both intensities, so the two-photon Rabi frequency scales
  // linearly and the light shifts do too.
  double sigma_sq =
      2.0 * std::sqrt(6.0) * big_delta_kHz * rabi_nominal_kHz * power_scale /
      std::sqrt(1.3);
  s.omega_sigma_kHz = std::sqrt(sigma_sq);
  s.omega_pi_kHz = std::sqrt(1.3 * sigma_sq);
  s.rabi_kHz = rabi_nominal_kHz * power_scale;

  dyn::RamanPulse probe;
  probe.big_delta_GHz = 0.65;
  probe.omega_pi_kHz = s.omega_pi_kHz;
  probe.omega_sigma_kHz = s.omega_sigma_kHz;
  dyn::RamanDerived der = dyn::raman_derived(probe, bundle.pump.gamma_p_MHz);
  s.resonance_kHz = core::total_delta_kHz(bundle.shift, n) +
                    der.shift_32_kHz - der.shift_12_kHz;
  return s;
}

SequenceSpec preset_mw_spectroscopy(MwVariant variant,
                                    const ModelBundle& bundle,
                                    const Imperfections& imp) {
  double nu0 = bundle.nu0.get(51, 49);

  dyn::MicrowavePulse probe;
  probe.n_hi = 51;
  probe.n_lo = 49;
  probe.two_photon = true;
  probe.source_freq_GHz = 0.5 * nu0;
  probe.rabi_kHz = pi_rabi_kHz(15.0);
  probe.duration_us = 15.0;

  SequenceSpec spec;
  spec.basis_manifolds = {51, 49};
  spec.initial = split_5s(imp.detection_bg);
  int probe_index = 0;
  if (variant != MwVariant::no_pump) {
    dyn::OpticalPump422 pump;
    pump.duration_us = 10.0;
    pump.repumper_on = variant == MwVariant::pump_plus_repump;
    pump.repumper_overhang_us = pump.repumper_on ? 1.0 : 0.0;
    spec.steps.push_back({0.0, pump});
    spec.steps.push_back({1.0, probe});
    probe_index = 1;
  } else {
    spec.steps.push_back({0.0, probe});
  }
  switch (variant) {
    case MwVariant::no_pump:
      spec.id = "mw_spectroscopy_no_pump";
      break;
    case MwVariant::pump:
      spec.id = "mw_spectroscopy_pump";
      break;
    case MwVariant::pump_plus_repump:
      spec.id = "mw_spectroscopy_pump_repump";
      break;
  }
  spec.scan.path = "steps[" + std::to_string(probe_index) + "].source_freq";
  spec.scan.values = linspace(0.5 * nu0, 200.0 * 1e-6, 81);
  spec.observable = {ObservableKind::channel, 49, 0};
  spec.jitter_sigma_kHz = imp.mw_jitter_sigma_kHz;
  spec.pump_leak_5s = imp.pump_leak_5s;
  spec.pump_loss_other = imp.pump_loss_other;
  return spec;
}

SequenceSpec preset_raman_spectroscopy(int n_init, double pulse_duration_us,
                                       double power_scale,
                                       const ModelBundle& bundle,
                                       const Imperfections& imp) {
  int partner = n_init == 51 ? 49 : 51;
  RamanSettings set =
      raman_settings_for(n_init, pulse_duration_us, power_scale, bundle);

  dyn::RamanPulse raman;
  raman.big_delta_GHz = 0.65;
  raman.small_delta_kHz = set.resonance_kHz;
  raman.omega_pi_kHz = set.omega_pi_kHz;
  raman.omega_sigma_kHz = set.omega_sigma_kHz;
  raman.duration_us = pulse_duration_us;
  raman.scattering_on = true;

  dyn::OpticalPump422 pump;
  pump.duration_us = 10.0;
  pump.repumper_on = true;
  pump.repumper_overhang_us = 1.0;

  SequenceSpec spec;
  std::ostringstream id;
  id << "raman_spectroscopy_n" << n_init;
  spec.id = id.str();
  spec.basis_manifolds = {n_init, partner};
  spec.initial.components = {{circ(n_init, core::CoreTerm::s5_half, -1), 0.5},
                             {circ(n_init, core::CoreTerm::s5_half, +1), 0.5}};
  spec.initial.bg_fraction = imp.detection_bg;
  spec.steps.push_back({0.0, pump});
  spec.steps.push_back({1.0, raman});
  spec.scan.path = "steps[1].small_delta";
  spec.scan.values = linspace(set.resonance_kHz, 150.0, 41);
  spec.observable = {ObservableKind::raman_ratio, 0, 0};
  spec.probe_mj32 = class_probe(n_init, partner, 3, bundle);
  spec.probe_mj12 = class_probe(n_init, partner, 1, bundle);
  spec.raman_transfer_channel = partner;
  spec.jitter_sigma_kHz = imp.mw_jitter_sigma_kHz;
  spec.pump_leak_5s = imp.pump_leak_5s;
  spec.pump_loss_other = imp.pump_loss_other;
  return spec;
}

SequenceSpec preset_ramsey_switch(bool raman_on, double raman_delta_kHz,
                                  const ModelBundle& bundle,
                                  const Imperfections& imp,
                                  double raman_power) {
  if (raman_on && raman_power <= 0.0) {
    throw ConfigError("raman power must be > 0 when the pulse is enabled");
  }
  // The interferometer addresses the filtered |mj|=3/2 atoms, so the scan
  // (and the nominal pulse frequency) centers on that class's two-photon
  // resonance rather than the bare transition.
  double nu_class = core::transition_frequency_GHz(
      circ(51, core::CoreTerm::d4_threehalf, +3),
      circ(49, core::CoreTerm::d4_threehalf, +3), bundle.shift, bundle.nu0);
  double nu_filter = bundle.nu0.get(51, 50);
  double delta_51 = core::total_delta_kHz(bundle.shift, 51);
  double delta_50 = core::total_delta_kHz(bundle.shift, 50);
  double delta_49 = core::total_delta_kHz(bundle.shift, 49);

  double beat_us = 1e3 / (delta_50 - delta_51);  // filter center-to-center
  double d_first = 0.15, d_second = 0.45;
  double ramsey_T = 15.0;  // pi/2 center-to-center

  dyn::MicrowavePulse filter;
  filter.n_hi = 51;
  filter.n_lo = 50;
  filter.two_photon = false;
  filter.source_freq_GHz = nu_filter;
  filter.rabi_kHz = half_pi_rabi_kHz(0.5);
  filter.duration_us = 0.5;

  dyn::MicrowavePulse half_a;
  half_a.n_hi = 51;
  half_a.n_lo = 49;
  half_a.two_photon = true;
  half_a.source_freq_GHz = 0.5 * nu_class;
  half_a.rabi_kHz = half_pi_rabi_kHz(d_first);
  half_a.duration_us = d_first;
  half_a.use_shared_source = true;

  dyn::MicrowavePulse half_b = half_a;
  half_b.rabi_kHz = half_pi_rabi_kHz(d_second);
  half_b.duration_us = d_second;

  dyn::OpticalPump422 pump;
  pump.duration_us = 10.0;
  pump.repumper_on = true;
  pump.repumper_overhang_us = 1.0;

  dyn::ProbePulse probe;
  probe.n_from = 51;
  probe.n_to = 53;
  probe.duration_us = 1.0;

  SequenceSpec spec;
  spec.id = raman_on ? "ramsey_switch_on" : "ramsey_switch_off";
  spec.basis_manifolds = {51, 50, 49};
  spec.initial = split_5s(imp.detection_bg);
  spec.steps.push_back({0.0, pump});
  spec.steps.push_back({1.0, filter});
  spec.steps.push_back({beat_us - filter.duration_us, filter});
  spec.steps.push_back({1.0, half_a});
  if (raman_on) {
    double detune = std::abs(delta_49 - delta_51);
    double rabi = raman_power * detune / std::sqrt(3.0);
    double dur = 1e3 / rabi;  // one resonant cycle
    double sigma_sq = 2.0 * std::sqrt(6.0) * (0.65 * 1e6) * rabi /
                      std::sqrt(1.3);
    dyn::RamanPulse raman;
    raman.big_delta_GHz = 0.65;
    raman.small_delta_kHz = raman_delta_kHz;
    raman.omega_sigma_kHz = std::sqrt(sigma_sq);
    raman.omega_pi_kHz = std::sqrt(1.3 * sigma_sq);
    raman.duration_us = dur;
    raman.scattering_on = true;
    double gap_a = 0.5 * ramsey_T - 0.5 * d_first - 0.5 * dur;
    double gap_b = 0.5 * ramsey_T - 0.5 * dur - 0.5 * d_second;
    if (gap_a < 0.0 || gap_b < 0.0) {
      throw ConfigError(
          "raman pulse does not fit between the interferometer pulses");
    }
    spec.steps.push_back({gap_a, raman});
    spec.steps.push_back({gap_b, half_b});
  } else {
    spec.steps.push_back({ramsey_T - 0.5 * d_first - 0.5 * d_second, half_b});
  }
  spec.steps.push_back({1.0, probe});
  spec.scan.path = "shared.source_freq";
  spec.scan.values = linspace(0.5 * nu_class, 30.0 * 1e-6, 61);
  spec.observable = {ObservableKind::normalized, 49, 53};
  // The source drift that broadens the averaged spectroscopy line is slow:
  // within one interferometer shot both pulses and the free evolution see
  // the same offset, so it does not wash out the fringe contrast. The
  // interferometric presets therefore run without the jitter convolution.
  spec.jitter_sigma_kHz = 0.0;
  spec.pump_leak_5s = imp.pump_leak_5s;
  spec.pump_loss_other = imp.pump_loss_other;
  return spec;
}

SequenceSpec preset_purification_filter(bool start_in_4d,
                                        const ModelBundle& bundle,
                                        const Imperfections& imp) {
  double nu_filter = bundle.nu0.get(51, 50);
  double delta_51 = core::total_delta_kHz(bundle.shift, 51);
  double delta_50 = core::total_delta_kHz(bundle.shift, 50);
  double beat_us = 1e3 / (delta_50 - delta_51);

  dyn::MicrowavePulse filter;
  filter.n_hi = 51;
  filter.n_lo = 50;
  filter.two_photon = false;
  filter.source_freq_GHz = nu_filter;
  filter.rabi_kHz = half_pi_rabi_kHz(0.5);
  filter.duration_us = 0.5;
  filter.use_shared_source = true;

  dyn::ProbePulse probe;
  probe.n_from = 51;
  probe.n_to = 53;
  probe.duration_us = 1.0;

  SequenceSpec spec;
  spec.id = start_in_4d ? "purification_filter_4d" : "purification_filter_5s";
  spec.basis_manifolds = {51, 50};
  if (start_in_4d) {
    spec.initial.components = {{circ(51, core::CoreTerm::d4_threehalf, -3), 0.5},
                               {circ(51, core::CoreTerm::d4_threehalf, +3), 0.5}};
  } else {
    spec.initial.components = {{circ(51, core::CoreTerm::s5_half, -1), 0.5},
                               {circ(51, core::CoreTerm::s5_half, +1), 0.5}};
  }
  spec.initial.bg_fraction = imp.detection_bg;
  spec.steps.push_back({0.0, filter});
  spec.steps.push_back({beat_us - filter.duration_us, filter});
  spec.steps.push_back({1.0, probe});
  spec.scan.path = "shared.source_freq";
  spec.scan.values = linspace(nu_filter, 100.0 * 1e-6, 41);
  spec.observable = {ObservableKind::normalized, 50, 53};
  // Interferometric sequence: slow source drift does not act within one
  // shot (see the ramsey preset).
  spec.jitter_sigma_kHz = 0.0;
  return spec;
}

}  // namespace circsim::seq
