#pragma once

#include <limits>
#include <string>
#include <vector>

#include "circsim/dataset.hpp"

namespace circsim::fit {

struct Parameter {
  std::string name;
  double value = 0.0;  // seed on input, estimate on output
  bool fixed = false;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

enum class ModelKind { gaussian_multi, rabi_lineshape, sine, linear };

// Parameter layouts:
//   gaussian_multi, shared width: amp_1..amp_k, center_1..center_k, width,
//     offset; y = offset + sum_i amp_i exp(-(x-c_i)^2 / (2 width^2)).
//   gaussian_multi, per-peak width: amp_i, center_i, width_i triplets then
//     offset.
//   rabi_lineshape: amp, center, offset with structural rabi_kHz and
//     duration_us; y = offset + amp * (W^2/(W^2+d^2)) sin^2(pi sqrt(W^2+d^2)
//     tau), d = x - center.
//   sine: offset, amp, freq, phase; y = offset + amp cos(2 pi freq x + phase).
//     Fix freq to fit a phase (or vice versa) via the fixed flags.
//   linear: intercept, slope.
struct FitModel {
  ModelKind kind = ModelKind::linear;
  int n_peaks = 1;            // gaussian_multi
  bool shared_width = true;   // gaussian_multi
  double rabi_kHz = 0.0;      // rabi_lineshape structural constants
  double duration_us = 0.0;
  std::vector<Parameter> params;

  static FitModel gaussians(int n_peaks, bool shared_width = true);
  static FitModel rabi(double rabi_kHz, double duration_us);
  static FitModel fringe();
  static FitModel line();

  Parameter& param(const std::string& name);
  const Parameter& param(const std::string& name) const;
};

// Model prediction at x for the given parameter values (layout above).
double eval(const FitModel& model, const std::vector<double>& values,
            double x);

struct FitResult {
  std::vector<Parameter> params;   // estimates, fixed flags preserved
  std::vector<double> sigma;       // 1-sigma, 0 for fixed parameters
  double chi2 = 0.0;               // weighted residual sum of squares
  int dof = 0;
  bool converged = false;
  int iterations = 0;
  std::string message;

  double value(const std::string& name) const;
  double sigma_of(const std::string& name) const;
};

// Damped Gauss-Newton weighted least squares with analytic Jacobians.
// Weights come from dataset errors (1/err^2); if any error is <= 0 all
// points get unit weight and the covariance is rescaled by chi2/dof. With
// genuine errors the covariance is reported raw, so uniformly rescaling the
// errors rescales the uncertainties proportionally.
FitResult fit(const seq::SpectrumDataset& data, const FitModel& model);
FitResult fit(const std::vector<double>& x, const std::vector<double>& y,
              const std::vector<double>& yerr, const FitModel& model);

}  // namespace circsim::fit
