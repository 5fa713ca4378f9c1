#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "circsim/presets.hpp"
#include "circsim/propagator.hpp"
#include "circsim/units.hpp"

namespace circsim::seq {

namespace {

// Fixed-frequency sinusoid y = c0 + a*cos(two_pi*f*u + phi) by linear least
// squares in (c0, a*cos(phi), -a*sin(phi)).
struct FringeFit {
  double amp = 0.0;
  double phase = 0.0;
};

FringeFit fit_fringe(const std::vector<double>& u, const std::vector<double>& y,
                     double f) {
  Eigen::MatrixXd a(u.size(), 3);
  Eigen::VectorXd b(u.size());
  for (size_t i = 0; i < u.size(); ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::cos(two_pi * f * u[i]);
    a(i, 2) = std::sin(two_pi * f * u[i]);
    b(static_cast<Eigen::Index>(i)) = y[i];
  }
  Eigen::Vector3d c = (a.transpose() * a).ldlt().solve(a.transpose() * b);
  FringeFit out;
  out.amp = std::hypot(c(1), c(2));
  out.phase = std::atan2(-c(2), c(1));
  return out;
}

}  // namespace

double find_delta_star(const ModelBundle& bundle, double pulse_power) {
  if (pulse_power <= 0.0) {
    throw std::invalid_argument("pulse power must be > 0");
  }
  Imperfections ideal = Imperfections::ideal();

  // Mini Ramsey fringe: 8 points across exactly one period of the shared
  // source. The interferometer accumulates phase at twice the source offset
  // (two-photon drive), so one fringe per 1/(2T) of source detuning.
  double ramsey_T_us = 15.0;
  double cycles_per_source_kHz = 2.0 * ramsey_T_us * 1e-3;
  double period_kHz = 1.0 / cycles_per_source_kHz;
  double x0 = 0.5 * core::transition_frequency_GHz(
                        {{51, core::RydbergKind::circular},
                         {core::CoreTerm::d4_threehalf, +3}},
                        {{49, core::RydbergKind::circular},
                         {core::CoreTerm::d4_threehalf, +3}},
                        bundle.shift, bundle.nu0);
  std::vector<double> u(8), xs(8);
  for (int j = 0; j < 8; ++j) {
    u[j] = -0.5 * period_kHz + period_kHz * j / 8.0;
    xs[j] = x0 + u[j] * 1e-6;
  }

  auto fringe_phase = [&](bool raman_on, double delta_kHz) {
    SequenceSpec spec =
        preset_ramsey_switch(raman_on, delta_kHz, bundle, ideal, pulse_power);
    spec.scan.values = xs;
    SpectrumDataset ds = run_sequence(spec, bundle, 0);
    FringeFit fit = fit_fringe(u, ds.value, cycles_per_source_kHz);
    if (fit.amp < 1e-4) {
      throw std::runtime_error(
          "ramsey fringe contrast collapsed during the phase search");
    }
    return fit.phase;
  };

  double phase_ref = fringe_phase(false, 0.0);
  // Phase error relative to a clean pi flip, wrapped to (-pi, pi].
  auto flip_error = [&](double delta_kHz) {
    return std::remainder(fringe_phase(true, delta_kHz) - phase_ref - pi,
                          two_pi);
  };

  // The pulse is resonant (including its own light shift) at delta_res; the
  // compensated point sits below it, so scan a window biased to the red side
  // for a sign change of the wrapped error.
  double omega_sigma_sq = 2.0 * std::sqrt(6.0) * (0.65 * 1e6) *
                          (pulse_power *
                           std::abs(core::total_delta_kHz(bundle.shift, 49) -
                                    core::total_delta_kHz(bundle.shift, 51)) /
                           std::sqrt(3.0)) /
                          std::sqrt(1.3);
  dyn::RamanPulse probe;
  probe.big_delta_GHz = 0.65;
  probe.omega_sigma_kHz = std::sqrt(omega_sigma_sq);
  probe.omega_pi_kHz = std::sqrt(1.3 * omega_sigma_sq);
  dyn::RamanDerived der = dyn::raman_derived(probe, bundle.pump.gamma_p_MHz);
  double delta_res = core::total_delta_kHz(bundle.shift, 49) +
                     der.shift_32_kHz - der.shift_12_kHz;

  int steps = 16;
  double lo = delta_res - 70.0, hi = delta_res + 10.0;
  double prev_x = lo, prev_g = flip_error(lo);
  double a = 0.0, b = 0.0, ga = 0.0;
  bool bracketed = false;
  for (int k = 1; k <= steps && !bracketed; ++k) {
    double x = lo + (hi - lo) * k / steps;
    double g = flip_error(x);
    // Require a modest jump so a branch-cut wrap of the phase difference is
    // not mistaken for a root.
    if (prev_g == 0.0) return prev_x;
    if (prev_g * g <= 0.0 && std::abs(g - prev_g) < pi) {
      a = prev_x;
      b = x;
      ga = prev_g;
      bracketed = true;
    }
    prev_x = x;
    prev_g = g;
  }
  if (!bracketed) {
    throw std::runtime_error(
        "no pi phase flip found in the scanned detuning window");
  }
  for (int it = 0; it < 12; ++it) {
    double mid = 0.5 * (a + b);
    double gm = flip_error(mid);
    if (gm == 0.0) return mid;
    if (ga * gm < 0.0) {
      b = mid;
    } else {
      a = mid;
      ga = gm;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace circsim::seq
