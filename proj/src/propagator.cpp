#include "circsim/propagator.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "circsim/errors.hpp"
#include "circsim/lindblad.hpp"
#include "circsim/units.hpp"

namespace circsim::dyn {

namespace {

const std::complex<double> i1(0.0, 1.0);

void check_unitary(const Eigen::MatrixXcd& u) {
  double dev = (u.adjoint() * u -
                Eigen::MatrixXcd::Identity(u.rows(), u.cols()))
                   .cwiseAbs()
                   .maxCoeff();
  if (!(dev < 1e-10)) {
    std::ostringstream msg;
    msg << "propagator unitarity violated: |U^dag U - 1| = " << dev;
    throw std::logic_error(msg.str());
  }
}

}  // namespace

Eigen::Matrix2cd two_level_u(double diag_a_kHz, double diag_b_kHz,
                             double coupling_kHz, double duration_us) {
  double mu = 0.5 * (diag_a_kHz + diag_b_kHz);
  double vz = 0.5 * (diag_a_kHz - diag_b_kHz);
  double vx = coupling_kHz;
  double f_g = std::hypot(vz, vx);
  double theta = two_pi * f_g * duration_us * 1e-3;
  std::complex<double> phase =
      std::exp(-i1 * two_pi * mu * duration_us * 1e-3);
  Eigen::Matrix2cd u;
  if (f_g == 0.0) {
    u = phase * Eigen::Matrix2cd::Identity();
    return u;
  }
  std::complex<double> c = std::cos(theta), s = -i1 * std::sin(theta);
  u(0, 0) = phase * (c + s * vz / f_g);
  u(1, 1) = phase * (c - s * vz / f_g);
  u(0, 1) = phase * s * vx / f_g;
  u(1, 0) = phase * s * vx / f_g;
  return u;
}

Propagator::Propagator(std::shared_ptr<const Basis> basis, double duration_us,
                       Eigen::VectorXd frame_offset_GHz, Eigen::MatrixXcd u_rot)
    : basis_(std::move(basis)),
      duration_us_(duration_us),
      frame_offset_GHz_(std::move(frame_offset_GHz)),
      unitary_(true),
      u_rot_(std::move(u_rot)) {
  check_unitary(u_rot_);
}

Propagator::Propagator(std::shared_ptr<const Basis> basis, double duration_us,
                       Eigen::VectorXd frame_offset_GHz,
                       std::vector<Eigen::MatrixXcd> sector_exp,
                       std::vector<Eigen::MatrixXcd> k_exp)
    : basis_(std::move(basis)),
      duration_us_(duration_us),
      frame_offset_GHz_(std::move(frame_offset_GHz)),
      unitary_(false),
      sector_exp_(std::move(sector_exp)),
      k_exp_(std::move(k_exp)) {}

Eigen::VectorXcd Propagator::boundary_phase(double t_us) const {
  Eigen::VectorXcd p(basis_->dim());
  for (int i = 0; i < basis_->dim(); ++i) {
    p(i) = std::exp(-i1 * two_pi *
                    cycles(frame_offset_GHz_(i), t_us));
  }
  return p;
}

void Propagator::apply(QuantumState& state, double t_start_us) const {
  if (!state.basis().same_layout(*basis_)) {
    throw ConfigError("propagator applied to a state with a different basis");
  }
  Eigen::MatrixXcd& rho = state.rho();
  Eigen::VectorXcd pin = boundary_phase(t_start_us);
  Eigen::VectorXcd pout = boundary_phase(t_start_us + duration_us_);

  rho = pin.conjugate().asDiagonal() * rho * pin.asDiagonal();
  if (unitary_) {
    rho = u_rot_ * rho * u_rot_.adjoint();
  } else {
    const int nm = basis_->n_manifolds();
    Eigen::MatrixXcd out = rho;
    for (int a = 0; a < nm; ++a) {
      for (int b = 0; b < nm; ++b) {
        Eigen::MatrixXcd blk = rho.block(8 * a, 8 * b, 8, 8);
        Eigen::Map<Eigen::VectorXcd> x(blk.data(), 64);
        Eigen::VectorXcd y = sector_exp_[a * nm + b] * x;
        out.block(8 * a, 8 * b, 8, 8) =
            Eigen::Map<Eigen::MatrixXcd>(y.data(), 8, 8);
      }
    }
    if (basis_->has_sink()) {
      int s = basis_->sink_index();
      for (int b = 0; b < nm; ++b) {
        out.block(s, 8 * b, 1, 8) =
            rho.block(s, 8 * b, 1, 8) * k_exp_[b].adjoint();
        out.block(8 * b, s, 8, 1) = k_exp_[b] * rho.block(8 * b, s, 8, 1);
      }
    }
    rho = std::move(out);
  }
  rho = pout.asDiagonal() * rho * pout.conjugate().asDiagonal();
}

Propagator mw_propagator(std::shared_ptr<const Basis> basis,
                         const MicrowavePulse& pulse) {
  if (pulse.n_hi == pulse.n_lo) {
    throw ConfigError("microwave pulse endpoints must differ");
  }
  if (pulse.duration_us < 0.0) {
    throw ConfigError("microwave pulse duration must be >= 0");
  }
  const Basis& b = *basis;
  int hi0 = b.block_start(pulse.n_hi);
  int lo0 = b.block_start(pulse.n_lo);
  double nu_eff_GHz = (pulse.two_photon ? 2.0 : 1.0) * pulse.source_freq_GHz;

  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(b.dim(), b.dim());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(b.dim());
  for (int c = 0; c < 8; ++c) {
    int hi = hi0 + c, lo = lo0 + c;
    double nu_trans_GHz = b.energy_GHz(hi) - b.energy_GHz(lo);
    double delta_kHz = (nu_eff_GHz - nu_trans_GHz) * kHz_per_GHz;
    Eigen::Matrix2cd u2 =
        two_level_u(0.0, delta_kHz, 0.5 * pulse.rabi_kHz, pulse.duration_us);
    u(hi, hi) = u2(0, 0);
    u(hi, lo) = u2(0, 1);
    u(lo, hi) = u2(1, 0);
    u(lo, lo) = u2(1, 1);
    g(lo) = -delta_kHz * 1e-6;
  }
  return Propagator(std::move(basis), pulse.duration_us, std::move(g),
                    std::move(u));
}

RamanDerived raman_derived(const RamanPulse& pulse, double gamma_p_MHz) {
  double delta_kHz = pulse.big_delta_GHz * kHz_per_GHz;
  if (delta_kHz == 0.0) {
    throw std::domain_error("raman beam detuning must be nonzero");
  }
  double wpi2 = pulse.omega_pi_kHz * pulse.omega_pi_kHz;
  double wsig2 = pulse.omega_sigma_kHz * pulse.omega_sigma_kHz;
  RamanDerived d;
  d.rabi_kHz = pulse.omega_pi_kHz * pulse.omega_sigma_kHz /
               (2.0 * std::sqrt(6.0) * delta_kHz);
  d.shift_32_kHz = wsig2 / (8.0 * delta_kHz);
  d.shift_12_kHz = wpi2 / (12.0 * delta_kHz) + wsig2 / (24.0 * delta_kHz);
  double gamma_rad_per_us = two_pi * gamma_p_MHz;
  double denom = 4.0 * delta_kHz * delta_kHz;
  d.scatter_rate_32_per_us = gamma_rad_per_us * wsig2 * 0.5 / denom;
  d.scatter_rate_12_per_us =
      gamma_rad_per_us * (wpi2 / 3.0 + wsig2 / 6.0) / denom;
  return d;
}

Propagator raman_propagator(std::shared_ptr<const Basis> basis,
                            const RamanPulse& pulse, double gamma_p_MHz) {
  if (pulse.duration_us < 0.0) {
    throw ConfigError("raman pulse duration must be >= 0");
  }
  const Basis& b = *basis;
  RamanDerived der = raman_derived(pulse, gamma_p_MHz);
  double delta_kHz = pulse.big_delta_GHz * kHz_per_GHz;

  double w_max = std::max(pulse.omega_pi_kHz, pulse.omega_sigma_kHz);
  if (w_max / std::abs(delta_kHz) > 0.15) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      std::cerr << "warning: raman beam Rabi frequency is "
                << w_max / std::abs(delta_kHz)
                << " of the beam detuning; the adiabatic two-photon model "
                   "degrades above ~0.15\n";
    }
  }

  const int nm = b.n_manifolds();
  std::vector<Eigen::MatrixXcd> h(nm);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(b.dim());
  for (int a = 0; a < nm; ++a) {
    int n = b.manifolds()[a];
    double delta_n_kHz = b.manifold_delta_kHz(n);
    Eigen::MatrixXcd hn = Eigen::MatrixXcd::Zero(8, 8);
    hn(4, 4) = hn(7, 7) = der.shift_32_kHz;
    hn(5, 5) = hn(6, 6) =
        der.shift_12_kHz + (pulse.small_delta_kHz - delta_n_kHz);
    hn(7, 6) = hn(6, 7) = 0.5 * der.rabi_kHz;
    hn(4, 5) = hn(5, 4) = 0.5 * der.rabi_kHz;
    h[a] = hn;
    g(8 * a + 5) = g(8 * a + 6) =
        (delta_n_kHz - pulse.small_delta_kHz) * 1e-6;
  }

  if (!pulse.scattering_on) {
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(b.dim(), b.dim());
    for (int a = 0; a < nm; ++a) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h[a]);
      Eigen::VectorXcd ph(8);
      for (int k = 0; k < 8; ++k) {
        ph(k) = std::exp(-i1 * two_pi * es.eigenvalues()(k) *
                         pulse.duration_us * 1e-3);
      }
      u.block(8 * a, 8 * a, 8, 8) = es.eigenvectors() * ph.asDiagonal() *
                                    es.eigenvectors().adjoint();
    }
    return Propagator(std::move(basis), pulse.duration_us, std::move(g),
                      std::move(u));
  }

  auto jumps = raman_scatter_jumps(pulse, gamma_p_MHz);
  auto exps = lindblad_sector_exponentials(h, jumps, pulse.duration_us);
  return Propagator(std::move(basis), pulse.duration_us, std::move(g),
                    std::move(exps.sector), std::move(exps.k));
}

}  // namespace circsim::dyn
