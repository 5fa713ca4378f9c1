#pragma once

#include <Eigen/Dense>

#include "circsim/pulses.hpp"
#include "circsim/state.hpp"

namespace circsim::dyn {

// Incoherent-beam parameters of the core optical pumping model. Drives are
// excitation rates per unit line strength; gamma_p is the 5p linewidth, so
// the total decay rate out of each 5p sublevel is 2*pi*gamma_p per us.
struct PumpRates {
  double gamma_p_MHz = 21.5;
  double drive_422_per_us = 50.0;
  double drive_1092_per_us = 50.0;
};

// Population-flow generator dP/dt = R P over the 8 core slots (Basis slot
// order), for the requested beam combination plus spontaneous decay.
Eigen::MatrixXd pump_rate_matrix(bool beam_422, bool beam_1092,
                                 const PumpRates& rates);

// Applies the pump pulse: rate equations on the core populations of every
// manifold (beams address the core regardless of n), with all coherences
// erased whenever any beam phase actually runs. Phase one drives 422
// (plus 1092 when repumper_on) for duration_us; phase two drives 1092 alone
// for repumper_overhang_us (repumper_on only). Zero-length pulses return the
// input unchanged. The sink is untouched.
QuantumState pump_evolution(const OpticalPump422& pulse,
                            const QuantumState& initial,
                            const PumpRates& rates);

}  // namespace circsim::dyn
