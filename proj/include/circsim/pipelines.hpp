#pragma once

#include <array>
#include <vector>

#include "circsim/atomic_core.hpp"
#include "circsim/dataset.hpp"
#include "circsim/fit.hpp"

namespace circsim::fit {

// Three-step constrained analysis of a microwave spectroscopy trio:
//   1. free single Gaussian on the unpumped reference -> nu0, w0, A0;
//   2. two Gaussians of fixed width w0 on the pumped spectrum -> nu_32,
//      nu_12 and their areas;
//   3. two Gaussians of width w0 with centers fixed to nu_32 and nu0 on the
//      repumped spectrum -> residual areas.
// Frequencies are reported on the effective (photon_mult x source) axis.
struct MwPipelineReport {
  double nu0_GHz = 0.0;
  double sigma_nu0_kHz = 0.0;
  double w0_kHz = 0.0;
  double sigma_w0_kHz = 0.0;
  double area0 = 0.0;

  double nu32_GHz = 0.0;
  double nu12_GHz = 0.0;
  double splitting_kHz = 0.0;
  double sigma_splitting_kHz = 0.0;
  double area32 = 0.0;
  double area12 = 0.0;
  double rel32 = 0.0;  // area32 / area0
  double rel12 = 0.0;

  double area32_prime = 0.0;
  double area0_prime = 0.0;
  double rel32_prime = 0.0;
  double rel0_prime = 0.0;
};

MwPipelineReport mw_three_step_pipeline(const seq::SpectrumDataset& reference,
                                        const seq::SpectrumDataset& pumped,
                                        const seq::SpectrumDataset& repumped,
                                        double photon_mult = 2.0);

// Weighted straight-line extrapolation of fitted resonances to zero beam
// power. Points are (power, resonance_kHz, sigma_kHz); sigma <= 0 anywhere
// switches to unit weights with chi2/dof rescaling.
struct ExtrapolationResult {
  double intercept_kHz = 0.0;
  double sigma_intercept_kHz = 0.0;
  double slope_kHz_per_power = 0.0;
  double sigma_slope_kHz = 0.0;
};

ExtrapolationResult light_shift_extrapolate(
    const std::vector<std::array<double, 3>>& points);

// One-parameter weighted fit of the quadrupole coefficient B in
// delta_n = B (ref/n)^6 + C (ref/n)^8 with C held at a given value, then
// conversion to the core quadrupole moment theta = B / delta_quad(ref, 1).
// sigma_B combines the statistical fit error with the shift of B under
// C +/- sigma_C; sigma_theta propagates sigma_B only.
struct DeltaPoint {
  int n = 0;
  double delta_kHz = 0.0;
  double sigma_kHz = 0.0;
};

struct ThetaReport {
  double B_kHz = 0.0;
  double sigma_B_kHz = 0.0;
  double theta = 0.0;
  double sigma_theta = 0.0;
};

ThetaReport fit_B_extract_theta(const std::vector<DeltaPoint>& deltas,
                                double C_kHz, double sigma_C_kHz,
                                const core::ShiftModel& ref);

// Fixed-frequency sinusoid fits of a fringe pair sharing one source axis;
// the fringe frequency is separation_us cycles per 1e3 effective-kHz.
struct RamseyPhaseReport {
  double phase_off_rad = 0.0;
  double phase_on_rad = 0.0;
  double shift_rad = 0.0;  // wrapped to (-pi, pi]
  double amp_off = 0.0;
  double amp_on = 0.0;
};

RamseyPhaseReport ramsey_phase_report(const seq::SpectrumDataset& fringe_off,
                                      const seq::SpectrumDataset& fringe_on,
                                      double separation_us,
                                      double photon_mult = 2.0);

// Filter characterization from the two purification datasets: transferred
// fraction of 5s-class atoms at the filter resonance and the retained
// fraction of 4d-class atoms at the same source point.
struct FilterReport {
  double transfer_5s = 0.0;
  double retention_4d = 0.0;
};

FilterReport filter_report(const seq::SpectrumDataset& from_5s,
                           const seq::SpectrumDataset& from_4d);

}  // namespace circsim::fit
