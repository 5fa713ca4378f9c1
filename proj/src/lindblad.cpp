#include "circsim/lindblad.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <complex>
#include <stdexcept>

#include "circsim/basis.hpp"
#include "circsim/units.hpp"

namespace circsim::dyn {

namespace {

// Slot indices, fixed by Basis::core_order().
constexpr int kSDn = 0, kSUp = 1, kPDn = 2, kPUp = 3;
constexpr int kDm3 = 4, kDm1 = 5, kDp1 = 6, kDp3 = 7;

// Column-major Kronecker product (matches vec(A X B) = (B^T (x) A) vec(X)).
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

std::vector<CoreJump> raman_scatter_jumps(const RamanPulse& pulse,
                                          double gamma_p_MHz) {
  double delta_kHz = pulse.big_delta_GHz * kHz_per_GHz;
  if (delta_kHz == 0.0) {
    throw std::domain_error("raman beam detuning must be nonzero");
  }
  double gamma_rad_per_us = two_pi * gamma_p_MHz;
  double wpi2 = pulse.omega_pi_kHz * pulse.omega_pi_kHz;
  double wsig2 = pulse.omega_sigma_kHz * pulse.omega_sigma_kHz;
  double denom = 4.0 * delta_kHz * delta_kHz;

  // Excitation paths (beam component, 4d source, 5p intermediate): rate of
  // off-resonant photon scattering through that leg.
  struct Path {
    int src, via;
    double rate;
  };
  const Path paths[] = {
      {kDp1, kPUp, gamma_rad_per_us * wpi2 * (1.0 / 3.0) / denom},   // pi
      {kDm1, kPDn, gamma_rad_per_us * wpi2 * (1.0 / 3.0) / denom},   // pi
      {kDp3, kPUp, gamma_rad_per_us * wsig2 * (1.0 / 2.0) / denom},  // sigma-
      {kDp1, kPDn, gamma_rad_per_us * wsig2 * (1.0 / 6.0) / denom},  // sigma-
      {kDm3, kPDn, gamma_rad_per_us * wsig2 * (1.0 / 2.0) / denom},  // sigma+
      {kDm1, kPUp, gamma_rad_per_us * wsig2 * (1.0 / 6.0) / denom},  // sigma+
  };

  // Decay branches of each 5p sublevel: (target slot, branch * strength).
  struct Branch {
    int tgt;
    double weight;
  };
  auto branches = [](int p_slot) {
    const double to_s = 17.0 / 18.0, to_d = 1.0 / 18.0;
    std::vector<Branch> out;
    if (p_slot == kPUp) {
      out = {{kSUp, to_s * (1.0 / 3.0)}, {kSDn, to_s * (2.0 / 3.0)},
             {kDp3, to_d * (1.0 / 2.0)}, {kDp1, to_d * (1.0 / 3.0)},
             {kDm1, to_d * (1.0 / 6.0)}};
    } else {
      out = {{kSDn, to_s * (1.0 / 3.0)}, {kSUp, to_s * (2.0 / 3.0)},
             {kDm3, to_d * (1.0 / 2.0)}, {kDm1, to_d * (1.0 / 3.0)},
             {kDp1, to_d * (1.0 / 6.0)}};
    }
    return out;
  };

  std::vector<CoreJump> jumps;
  jumps.reserve(30);
  for (const auto& path : paths) {
    for (const auto& br : branches(path.via)) {
      jumps.push_back({path.src, br.tgt, path.rate * br.weight});
    }
  }
  return jumps;
}

SectorExponentials lindblad_sector_exponentials(
    const std::vector<Eigen::MatrixXcd>& h_kHz,
    const std::vector<CoreJump>& jumps, double duration_us) {
  const std::complex<double> i1(0.0, 1.0);
  const double rad_per_kHz_us = two_pi * 1e-3;
  const int nm = static_cast<int>(h_kHz.size());
  const Eigen::MatrixXcd id8 = Eigen::MatrixXcd::Identity(8, 8);

  // Jump blocks are manifold-independent: precompute the dissipator pieces.
  Eigen::MatrixXcd recycle = Eigen::MatrixXcd::Zero(64, 64);
  Eigen::MatrixXcd decay_diag = Eigen::MatrixXcd::Zero(8, 8);
  for (const auto& j : jumps) {
    Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(8, 8);
    l(j.tgt_slot, j.src_slot) = std::sqrt(j.rate_per_us);
    recycle += kron(l.conjugate(), l);
    decay_diag(j.src_slot, j.src_slot) += j.rate_per_us;
  }
  Eigen::MatrixXcd dissipator = recycle -
                                0.5 * kron(id8, decay_diag) -
                                0.5 * kron(decay_diag.transpose(), id8);

  SectorExponentials out;
  out.sector.resize(nm * nm);
  out.k.resize(nm);
  for (int a = 0; a < nm; ++a) {
    for (int b = 0; b < nm; ++b) {
      Eigen::MatrixXcd g =
          -i1 * rad_per_kHz_us *
              (kron(id8, h_kHz[a]) - kron(h_kHz[b].transpose(), id8)) +
          dissipator;
      out.sector[a * nm + b] = (g * duration_us).exp();
    }
    Eigen::MatrixXcd k = -i1 * rad_per_kHz_us * h_kHz[a] - 0.5 * decay_diag;
    out.k[a] = (k * duration_us).exp();
  }
  return out;
}

}  // namespace circsim::dyn
