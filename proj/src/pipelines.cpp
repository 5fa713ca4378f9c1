#include "circsim/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "circsim/errors.hpp"
#include "circsim/units.hpp"

namespace circsim::fit {

namespace {

constexpr double root_two_pi = 2.5066282746310002;

// Recentred effective-frequency axis in kHz around a pivot in GHz.
std::vector<double> effective_axis_kHz(const seq::SpectrumDataset& ds, double mult,
                                       double pivot_GHz) {
  std::vector<double> u(ds.axis.size());
  for (size_t i = 0; i < u.size(); ++i) {
    u[i] = (mult * ds.axis[i] - pivot_GHz) * 1e6;
  }
  return u;
}

FitResult fit_or_throw(const std::vector<double>& x,
                       const std::vector<double>& y,
                       const std::vector<double>& yerr, const FitModel& model,
                       const char* step_name) {
  FitResult r = fit(x, y, yerr, model);
  if (!r.converged) {
    throw std::runtime_error(std::string("three-step pipeline: the ") +
                             step_name + " fit did not converge (" +
                             r.message + ")");
  }
  return r;
}

double width_seed_kHz(const std::vector<double>& u,
                      const std::vector<double>& y, double base,
                      double amp) {
  // Half-maximum crossing count; falls back to an eighth of the span.
  double half = base + 0.5 * amp;
  double lo = u.back(), hi = u.front();
  for (size_t i = 0; i < u.size(); ++i) {
    if (y[i] >= half) {
      lo = std::min(lo, u[i]);
      hi = std::max(hi, u[i]);
    }
  }
  double fwhm = hi - lo;
  if (fwhm <= 0.0) fwhm = (u.back() - u.front()) / 8.0;
  return std::max(fwhm / 2.355, 1e-3);
}

// The two dominant well-separated local maxima, leftmost first.
std::pair<size_t, size_t> two_peak_seeds(const std::vector<double>& u,
                                         const std::vector<double>& y,
                                         double min_sep_kHz) {
  std::vector<size_t> maxima;
  for (size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] >= y[i - 1] && y[i] >= y[i + 1]) maxima.push_back(i);
  }
  if (maxima.empty()) maxima.push_back(y.size() / 2);
  std::sort(maxima.begin(), maxima.end(),
            [&](size_t a, size_t b) { return y[a] > y[b]; });
  size_t first = maxima[0];
  size_t second = first;
  for (size_t m : maxima) {
    if (std::abs(u[m] - u[first]) >= min_sep_kHz) {
      second = m;
      break;
    }
  }
  if (second == first && maxima.size() > 1) second = maxima[1];
  if (second == first) {
    // Degenerate data; split the axis around the single bump.
    second = first > y.size() / 2 ? 0 : y.size() - 1;
  }
  if (u[first] > u[second]) std::swap(first, second);
  return {first, second};
}

}  // namespace

MwPipelineReport mw_three_step_pipeline(const seq::SpectrumDataset& reference,
                                        const seq::SpectrumDataset& pumped,
                                        const seq::SpectrumDataset& repumped,
                                        double photon_mult) {
  if (reference.axis.size() < 5 || pumped.axis.size() < 6 ||
      repumped.axis.size() < 5) {
    throw ConfigError("three-step pipeline needs denser spectra");
  }

  // Pivot at the reference maximum so all fits run on O(100 kHz) numbers.
  size_t imax = std::distance(
      reference.value.begin(),
      std::max_element(reference.value.begin(), reference.value.end()));
  double pivot_GHz = photon_mult * reference.axis[imax];

  MwPipelineReport rep;

  // Step 1: free Gaussian on the unpumped reference.
  {
    std::vector<double> u = effective_axis_kHz(reference, photon_mult, pivot_GHz);
    const std::vector<double>& y = reference.value;
    double base = *std::min_element(y.begin(), y.end());
    double amp = *std::max_element(y.begin(), y.end()) - base;
    FitModel m = FitModel::gaussians(1);
    m.param("amp1").value = amp;
    m.param("center1").value = u[imax];
    m.param("width").value = width_seed_kHz(u, y, base, amp);
    m.param("offset").value = base;
    FitResult r = fit_or_throw(u, y, reference.error, m, "reference");
    rep.nu0_GHz = pivot_GHz + r.value("center1") * 1e-6;
    rep.sigma_nu0_kHz = r.sigma_of("center1");
    rep.w0_kHz = std::abs(r.value("width"));
    rep.sigma_w0_kHz = r.sigma_of("width");
    rep.area0 = r.value("amp1") * rep.w0_kHz * root_two_pi;
  }

  // Step 2: two peaks of the same fixed width on the pumped spectrum.
  double u32 = 0.0, u0_ref = (rep.nu0_GHz - pivot_GHz) * 1e6;
  {
    std::vector<double> u = effective_axis_kHz(pumped, photon_mult, pivot_GHz);
    const std::vector<double>& y = pumped.value;
    double base = *std::min_element(y.begin(), y.end());
    auto [i1, i2] = two_peak_seeds(u, y, 2.0 * rep.w0_kHz);
    FitModel m = FitModel::gaussians(2);
    m.param("amp1").value = y[i1] - base;
    m.param("amp2").value = y[i2] - base;
    m.param("center1").value = u[i1];
    m.param("center2").value = u[i2];
    m.param("width").value = rep.w0_kHz;
    m.param("width").fixed = true;
    m.param("offset").value = base;
    FitResult r = fit_or_throw(u, y, pumped.error, m, "pumped");
    double c1 = r.value("center1"), c2 = r.value("center2");
    double a1 = r.value("amp1"), a2 = r.value("amp2");
    double s1 = r.sigma_of("center1"), s2 = r.sigma_of("center2");
    if (c1 > c2) {
      std::swap(c1, c2);
      std::swap(a1, a2);
      std::swap(s1, s2);
    }
    u32 = c1;
    rep.nu32_GHz = pivot_GHz + c1 * 1e-6;
    rep.nu12_GHz = pivot_GHz + c2 * 1e-6;
    rep.splitting_kHz = c2 - c1;
    rep.sigma_splitting_kHz = std::hypot(s1, s2);
    rep.area32 = a1 * rep.w0_kHz * root_two_pi;
    rep.area12 = a2 * rep.w0_kHz * root_two_pi;
    rep.rel32 = rep.area32 / rep.area0;
    rep.rel12 = rep.area12 / rep.area0;
  }

  // Step 3: fixed width and fixed centers (the |mj|=3/2 line and the
  // residual unpumped line) on the repumped spectrum.
  {
    std::vector<double> u = effective_axis_kHz(repumped, photon_mult, pivot_GHz);
    const std::vector<double>& y = repumped.value;
    double base = *std::min_element(y.begin(), y.end());
    auto value_near = [&](double where) {
      size_t best = 0;
      for (size_t i = 1; i < u.size(); ++i) {
        if (std::abs(u[i] - where) < std::abs(u[best] - where)) best = i;
      }
      return y[best];
    };
    FitModel m = FitModel::gaussians(2);
    m.param("center1").value = u32;
    m.param("center1").fixed = true;
    m.param("center2").value = u0_ref;
    m.param("center2").fixed = true;
    m.param("width").value = rep.w0_kHz;
    m.param("width").fixed = true;
    m.param("amp1").value = std::max(value_near(u32) - base, 0.0);
    m.param("amp2").value = std::max(value_near(u0_ref) - base, 0.0);
    m.param("offset").value = base;
    FitResult r = fit_or_throw(u, y, repumped.error, m, "repumped");
    rep.area32_prime = r.value("amp1") * rep.w0_kHz * root_two_pi;
    rep.area0_prime = r.value("amp2") * rep.w0_kHz * root_two_pi;
    rep.rel32_prime = rep.area32_prime / rep.area0;
    rep.rel0_prime = rep.area0_prime / rep.area0;
  }

  return rep;
}

ExtrapolationResult light_shift_extrapolate(
    const std::vector<std::array<double, 3>>& points) {
  std::set<double> powers;
  for (const auto& p : points) powers.insert(p[0]);
  if (powers.size() < 2) {
    throw ConfigError(
        "zero-power extrapolation needs at least two distinct powers");
  }
  bool have_errors = std::all_of(points.begin(), points.end(),
                                 [](const auto& p) { return p[2] > 0.0; });
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : points) {
    double w = have_errors ? 1.0 / (p[2] * p[2]) : 1.0;
    sw += w;
    sx += w * p[0];
    sy += w * p[1];
    sxx += w * p[0] * p[0];
    sxy += w * p[0] * p[1];
  }
  double det = sw * sxx - sx * sx;
  if (det <= 0.0) {
    throw ConfigError("zero-power extrapolation is degenerate");
  }
  ExtrapolationResult out;
  out.slope_kHz_per_power = (sw * sxy - sx * sy) / det;
  out.intercept_kHz = (sxx * sy - sx * sxy) / det;
  double scale = 1.0;
  if (!have_errors) {
    double chi2 = 0.0;
    for (const auto& p : points) {
      double r = p[1] - out.intercept_kHz - out.slope_kHz_per_power * p[0];
      chi2 += r * r;
    }
    int dof = static_cast<int>(points.size()) - 2;
    scale = dof > 0 ? chi2 / dof : 0.0;
  }
  out.sigma_intercept_kHz = std::sqrt(scale * sxx / det);
  out.sigma_slope_kHz = std::sqrt(scale * sw / det);
  if (have_errors) {
    out.sigma_intercept_kHz = std::sqrt(sxx / det);
    out.sigma_slope_kHz = std::sqrt(sw / det);
  }
  return out;
}

ThetaReport fit_B_extract_theta(const std::vector<DeltaPoint>& deltas,
                                double C_kHz, double sigma_C_kHz,
                                const core::ShiftModel& ref) {
  if (deltas.empty()) {
    throw ConfigError("theta extraction needs at least one splitting");
  }
  std::set<int> ns;
  for (const auto& d : deltas) {
    if (!ns.insert(d.n).second) {
      throw ConfigError("theta extraction needs distinct n values");
    }
  }
  bool have_errors = std::all_of(deltas.begin(), deltas.end(),
                                 [](const DeltaPoint& d) {
                                   return d.sigma_kHz > 0.0;
                                 });
  double sxx = 0.0, sxr = 0.0, sxy = 0.0;
  for (const auto& d : deltas) {
    double x = std::pow(static_cast<double>(ref.reference_n) / d.n, 6);
    double yv = std::pow(static_cast<double>(ref.reference_n) / d.n, 8);
    double w = have_errors ? 1.0 / (d.sigma_kHz * d.sigma_kHz) : 1.0;
    sxx += w * x * x;
    sxr += w * x * (d.delta_kHz - C_kHz * yv);
    sxy += w * x * yv;
  }
  ThetaReport out;
  out.B_kHz = sxr / sxx;
  double sigma_fit_sq = 1.0 / sxx;
  if (!have_errors) {
    double chi2 = 0.0;
    for (const auto& d : deltas) {
      double x = std::pow(static_cast<double>(ref.reference_n) / d.n, 6);
      double yv = std::pow(static_cast<double>(ref.reference_n) / d.n, 8);
      chi2 += std::pow(d.delta_kHz - out.B_kHz * x - C_kHz * yv, 2);
    }
    int dof = static_cast<int>(deltas.size()) - 1;
    sigma_fit_sq = dof > 0 ? chi2 / dof / sxx : 0.0;
  }
  double dB_dC = sxy / sxx;  // linear response of B to the held C
  out.sigma_B_kHz =
      std::sqrt(sigma_fit_sq + (dB_dC * sigma_C_kHz) * (dB_dC * sigma_C_kHz));
  double kappa = core::quadrupole_delta_kHz(ref.reference_n, 1.0);
  out.theta = out.B_kHz / kappa;
  out.sigma_theta = out.sigma_B_kHz / kappa;
  return out;
}

RamseyPhaseReport ramsey_phase_report(const seq::SpectrumDataset& fringe_off,
                                      const seq::SpectrumDataset& fringe_on,
                                      double separation_us,
                                      double photon_mult) {
  if (fringe_off.axis.size() < 5 || fringe_on.axis.size() < 5) {
    throw ConfigError("fringe fits need at least five points");
  }
  double pivot_GHz =
      photon_mult * fringe_off.axis[fringe_off.axis.size() / 2];
  double freq = separation_us * 1e-3;  // cycles per effective kHz

  auto fit_one = [&](const seq::SpectrumDataset& ds, double& amp, double& phase) {
    std::vector<double> u = effective_axis_kHz(ds, photon_mult, pivot_GHz);
    const std::vector<double>& y = ds.value;
    double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
    double c = 0.0, s = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
      c += (y[i] - mean) * std::cos(two_pi * freq * u[i]);
      s += (y[i] - mean) * std::sin(two_pi * freq * u[i]);
    }
    FitModel m = FitModel::fringe();
    m.param("offset").value = mean;
    m.param("amp").value = std::max(std::hypot(c, s) * 2.0 / u.size(), 1e-6);
    m.param("freq").value = freq;
    m.param("freq").fixed = true;
    m.param("phase").value = std::atan2(-s, c);
    FitResult r = fit(u, y, ds.error, m);
    if (!r.converged) {
      throw std::runtime_error("fringe fit did not converge (" + r.message +
                               ")");
    }
    amp = r.value("amp");
    phase = r.value("phase");
    if (amp < 0.0) {
      amp = -amp;
      phase += pi;
    }
    phase = std::remainder(phase, two_pi);
  };

  RamseyPhaseReport rep;
  fit_one(fringe_off, rep.amp_off, rep.phase_off_rad);
  fit_one(fringe_on, rep.amp_on, rep.phase_on_rad);
  rep.shift_rad = std::remainder(rep.phase_on_rad - rep.phase_off_rad, two_pi);
  return rep;
}

FilterReport filter_report(const seq::SpectrumDataset& from_5s,
                           const seq::SpectrumDataset& from_4d) {
  if (from_5s.value.empty() || from_4d.value.empty()) {
    throw ConfigError("filter characterization needs data");
  }
  // Operating point: the nominal filter resonance, i.e. the middle of the
  // (symmetric) scan. The 5s transfer curve is flat-topped near resonance,
  // so an argmax would wander under shot noise.
  auto center_index = [](const std::vector<double>& axis) {
    double mid = 0.5 * (axis.front() + axis.back());
    size_t best = 0;
    for (size_t i = 1; i < axis.size(); ++i) {
      if (std::abs(axis[i] - mid) < std::abs(axis[best] - mid)) best = i;
    }
    return best;
  };
  FilterReport rep;
  rep.transfer_5s = from_5s.value[center_index(from_5s.axis)];
  rep.retention_4d = 1.0 - from_4d.value[center_index(from_4d.axis)];
  return rep;
}

}  // namespace circsim::fit
