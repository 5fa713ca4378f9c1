#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "circsim/pulses.hpp"
#include "circsim/state.hpp"

namespace circsim::dyn {

// Evolution operator for one pulse, stored in an interaction picture where
// free evolution is the identity: level i carries the bookkeeping energy
// E_i from the Basis, free phases are absorbed into the state definition,
// and a pulse contributes
//   rho -> P(t0+tau) M[ P(t0)^dag rho P(t0) ] P(t0+tau)^dag
// with P(t) = diag(exp(-i 2 pi g_i t)) built from the per-level frame offset
// g_i = f_i - E_i (GHz) of the pulse's rotating frame, and M the
// rotating-frame map (a unitary, or a sector-wise Lindblad map when photon
// scattering is included). Composing pulses this way keeps every detuning
// and free-evolution phase exact without ever tracking optical/microwave
// carrier phases explicitly.
class Propagator {
 public:
  // Unitary rotating-frame map.
  Propagator(std::shared_ptr<const Basis> basis, double duration_us,
             Eigen::VectorXd frame_offset_GHz, Eigen::MatrixXcd u_rot);

  // Dissipative map, factored over (manifold, manifold) sectors of the
  // density matrix: sector_exp[a * n_manifolds + b] is the 64x64 exponential
  // acting on vec(rho_ab); k_exp[b] = exp(K_b tau) propagates the sink
  // row/column coherences.
  Propagator(std::shared_ptr<const Basis> basis, double duration_us,
             Eigen::VectorXd frame_offset_GHz,
             std::vector<Eigen::MatrixXcd> sector_exp,
             std::vector<Eigen::MatrixXcd> k_exp);

  const Basis& basis() const { return *basis_; }
  double duration_us() const { return duration_us_; }
  bool unitary() const { return unitary_; }
  const Eigen::MatrixXcd& u_rot() const { return u_rot_; }
  const Eigen::VectorXd& frame_offset_GHz() const { return frame_offset_GHz_; }

  // Applies the pulse to `state`, which sits at absolute time t_start_us.
  void apply(QuantumState& state, double t_start_us) const;

 private:
  Eigen::VectorXcd boundary_phase(double t_us) const;

  std::shared_ptr<const Basis> basis_;
  double duration_us_;
  Eigen::VectorXd frame_offset_GHz_;
  bool unitary_;
  Eigen::MatrixXcd u_rot_;
  std::vector<Eigen::MatrixXcd> sector_exp_;
  std::vector<Eigen::MatrixXcd> k_exp_;
};

// Propagator of a two-level rotating-frame Hamiltonian
//   H = [[diag_a, coupling], [coupling, diag_b]]   (kHz, duration in us)
// evaluated in closed form.
Eigen::Matrix2cd two_level_u(double diag_a_kHz, double diag_b_kHz,
                             double coupling_kHz, double duration_us);

// Microwave drive between two circular manifolds: one detuned two-level
// rotation per core slot, detuning set by the slot's quadrupole-shifted
// transition frequency. Throws ConfigError if a named manifold is absent.
Propagator mw_propagator(std::shared_ptr<const Basis> basis,
                         const MicrowavePulse& pulse);

// Optical Raman drive on the 4d core spin, acting within every manifold of
// the basis (each with its own splitting, shared beam parameters). With
// pulse.scattering_on, includes photon-scattering jump operators whose decay
// rates scale with gamma_p_MHz (the 5p linewidth).
Propagator raman_propagator(std::shared_ptr<const Basis> basis,
                            const RamanPulse& pulse, double gamma_p_MHz);

// Effective two-photon Rabi frequency and the two light-shift diagonals of
// the Raman drive (kHz); exposed for tests and for preset construction.
struct RamanDerived {
  double rabi_kHz;        // coupling between |mj|=3/2 and |mj|=1/2
  double shift_32_kHz;    // light shift of |mj|=3/2
  double shift_12_kHz;    // light shift of |mj|=1/2
  double scatter_rate_32_per_us;  // total photon-scatter rate out of |mj|=3/2
  double scatter_rate_12_per_us;
};
RamanDerived raman_derived(const RamanPulse& pulse, double gamma_p_MHz);

}  // namespace circsim::dyn
