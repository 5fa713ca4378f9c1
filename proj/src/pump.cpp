#include "circsim/pump.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "circsim/errors.hpp"
#include "circsim/units.hpp"

namespace circsim::dyn {

namespace {

const std::array<core::Polarization, 3> kAllPols = {
    core::Polarization::sigma_minus, core::Polarization::pi,
    core::Polarization::sigma_plus};

double strength_all_pol(const core::CoreLevel& from, const core::CoreLevel& to) {
  double s = 0.0;
  for (auto q : kAllPols) s += core::core_line_strength(q, from, to);
  return s;
}

}  // namespace

Eigen::MatrixXd pump_rate_matrix(bool beam_422, bool beam_1092,
                                 const PumpRates& rates) {
  const auto& order = dyn::Basis::core_order();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(8, 8);
  auto add_flow = [&](int src, int tgt, double rate) {
    r(tgt, src) += rate;
    r(src, src) -= rate;
  };

  for (int src = 0; src < 8; ++src) {
    for (int tgt = 0; tgt < 8; ++tgt) {
      const auto& from = order[src];
      const auto& to = order[tgt];
      if (to.term == core::CoreTerm::p5_half) {
        // Absorption. 422: isotropic polarization mix from 5s; 1092:
        // pi-polarized from 4d (the |mj|=3/2 pair is pi-dark).
        if (beam_422 && from.term == core::CoreTerm::s5_half) {
          add_flow(src, tgt, rates.drive_422_per_us * strength_all_pol(from, to));
        }
        if (beam_1092 && from.term == core::CoreTerm::d4_threehalf) {
          add_flow(src, tgt,
                   rates.drive_1092_per_us *
                       core::core_line_strength(core::Polarization::pi, from, to));
        }
      } else if (from.term == core::CoreTerm::p5_half) {
        // Spontaneous decay, branching 17/18 to 5s and 1/18 to 4d.
        double branch = (to.term == core::CoreTerm::s5_half) ? 17.0 / 18.0
                                                             : 1.0 / 18.0;
        double gamma_per_us = two_pi * rates.gamma_p_MHz;
        add_flow(src, tgt, gamma_per_us * branch * strength_all_pol(from, to));
      }
    }
  }
  return r;
}

QuantumState pump_evolution(const OpticalPump422& pulse,
                            const QuantumState& initial,
                            const PumpRates& rates) {
  if (pulse.duration_us < 0.0 || pulse.repumper_overhang_us < 0.0) {
    throw ConfigError("pump durations must be >= 0");
  }
  bool phase1 = pulse.duration_us > 0.0;
  bool phase2 = pulse.repumper_on && pulse.repumper_overhang_us > 0.0;
  if (!phase1 && !phase2) return initial;

  QuantumState out = initial;
  Eigen::VectorXcd diag = out.rho().diagonal();
  out.rho().setZero();
  out.rho().diagonal() = diag;

  Eigen::MatrixXd prop = Eigen::MatrixXd::Identity(8, 8);
  if (phase1) {
    Eigen::MatrixXd r1 = pump_rate_matrix(true, pulse.repumper_on, rates);
    prop = (r1 * pulse.duration_us).exp() * prop;
  }
  if (phase2) {
    Eigen::MatrixXd r2 = pump_rate_matrix(false, true, rates);
    prop = (r2 * pulse.repumper_overhang_us).exp() * prop;
  }

  const Basis& b = out.basis();
  for (int a = 0; a < b.n_manifolds(); ++a) {
    Eigen::VectorXd pops(8);
    for (int k = 0; k < 8; ++k) pops(k) = out.rho()(8 * a + k, 8 * a + k).real();
    pops = prop * pops;
    for (int k = 0; k < 8; ++k) out.rho()(8 * a + k, 8 * a + k) = pops(k);
  }
  return out;
}

}  // namespace circsim::dyn
