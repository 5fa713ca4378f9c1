#pragma once

#include <Eigen/Dense>
#include <memory>
#include <utility>
#include <vector>

#include "circsim/basis.hpp"

namespace circsim::dyn {

// Density matrix over a Basis. Dimensions are small (tens of levels), so the
// matrix is kept dense.
class QuantumState {
 public:
  explicit QuantumState(std::shared_ptr<const Basis> basis);

  static QuantumState pure(std::shared_ptr<const Basis> basis,
                           const core::CompositeLevel& level);
  // Diagonal mixture. Weights are normalized to (1 - sink_fraction); the
  // remaining sink_fraction goes to the sink level (requires a sink if > 0).
  static QuantumState mixture(
      std::shared_ptr<const Basis> basis,
      const std::vector<std::pair<core::CompositeLevel, double>>& components,
      double sink_fraction = 0.0);

  const Basis& basis() const { return *basis_; }
  const std::shared_ptr<const Basis>& basis_ptr() const { return basis_; }

  Eigen::MatrixXcd& rho() { return rho_; }
  const Eigen::MatrixXcd& rho() const { return rho_; }

  double population(int idx) const { return rho_(idx, idx).real(); }
  double population(const core::CompositeLevel& level) const;
  double manifold_population(int n) const;  // all 8 core slots
  double trace() const { return rho_.trace().real(); }
  std::vector<double> populations() const;

  void symmetrize() { rho_ = 0.5 * (rho_ + rho_.adjoint()).eval(); }
  // Checks Hermiticity, unit trace and positivity (eigenvalues >= -tol);
  // throws std::runtime_error naming the violated property.
  void validate(double tol = 1e-9) const;

 private:
  std::shared_ptr<const Basis> basis_;
  Eigen::MatrixXcd rho_;
};

}  // namespace circsim::dyn
