#pragma once

#include <Eigen/Dense>
#include <vector>

#include "circsim/pulses.hpp"

namespace circsim::dyn {

// One incoherent photon-scattering channel inside the 8-slot core space.
// The full jump operator is sqrt(rate) * sum_n |n, tgt><n, src| — identical
// in every manifold, so scattering preserves inter-manifold coherence (the
// emitted photon frequency carries core-state, not Rydberg, information).
struct CoreJump {
  int src_slot;
  int tgt_slot;
  double rate_per_us;
};

// Enumerates the scattering channels of the two-beam Raman drive: each beam
// component off-resonantly excites its 4d sublevels to 5p (rate
// 2*pi*gamma * omega^2 * strength / (4 big_delta^2)), which then decays with
// branching 17/18 to 5s and 1/18 back to 4d, split by line strengths.
std::vector<CoreJump> raman_scatter_jumps(const RamanPulse& pulse,
                                          double gamma_p_MHz);

// Exponentials of the Lindblad generator restricted to (manifold, manifold)
// sectors of the density matrix. h_kHz[a] is the rotating-frame Hamiltonian
// of manifold a (8x8, kHz); the jumps act identically in every manifold.
// sector[a * n + b] propagates vec(rho_ab) (column-major, 64 components);
// k[b] = exp((-i 2 pi 1e-3 H_b - 1/2 sum_j l_j^dag l_j) tau) propagates the
// sink-coherence row/column against manifold b.
struct SectorExponentials {
  std::vector<Eigen::MatrixXcd> sector;
  std::vector<Eigen::MatrixXcd> k;
};

SectorExponentials lindblad_sector_exponentials(
    const std::vector<Eigen::MatrixXcd>& h_kHz,
    const std::vector<CoreJump>& jumps, double duration_us);

}  // namespace circsim::dyn
