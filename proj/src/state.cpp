#include "circsim/state.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "circsim/errors.hpp"

namespace circsim::dyn {

QuantumState::QuantumState(std::shared_ptr<const Basis> basis)
    : basis_(std::move(basis)),
      rho_(Eigen::MatrixXcd::Zero(basis_->dim(), basis_->dim())) {}

QuantumState QuantumState::pure(std::shared_ptr<const Basis> basis,
                                const core::CompositeLevel& level) {
  QuantumState st(std::move(basis));
  int i = st.basis_->index_of(level);
  st.rho_(i, i) = 1.0;
  return st;
}

QuantumState QuantumState::mixture(
    std::shared_ptr<const Basis> basis,
    const std::vector<std::pair<core::CompositeLevel, double>>& components,
    double sink_fraction) {
  QuantumState st(std::move(basis));
  if (sink_fraction < 0.0 || sink_fraction > 1.0) {
    throw ConfigError("sink fraction of an initial state must be in [0, 1]");
  }
  double total = 0.0;
  for (const auto& [level, w] : components) {
    (void)level;
    if (w < 0.0) throw ConfigError("initial-state weights must be >= 0");
    total += w;
  }
  if (total <= 0.0 && sink_fraction < 1.0) {
    throw ConfigError("initial state needs at least one positive weight");
  }
  for (const auto& [level, w] : components) {
    if (w == 0.0) continue;
    int i = st.basis_->index_of(level);
    st.rho_(i, i) += w / total * (1.0 - sink_fraction);
  }
  if (sink_fraction > 0.0) {
    st.rho_(st.basis_->sink_index(), st.basis_->sink_index()) += sink_fraction;
  }
  return st;
}

double QuantumState::population(const core::CompositeLevel& level) const {
  return population(basis_->index_of(level));
}

double QuantumState::manifold_population(int n) const {
  int b = basis_->block_start(n);
  double p = 0.0;
  for (int k = 0; k < 8; ++k) p += rho_(b + k, b + k).real();
  return p;
}

std::vector<double> QuantumState::populations() const {
  std::vector<double> p(basis_->dim());
  for (int i = 0; i < basis_->dim(); ++i) p[i] = rho_(i, i).real();
  return p;
}

void QuantumState::validate(double tol) const {
  double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm <= tol)) {
    std::ostringstream msg;
    msg << "state not Hermitian: max |rho - rho^dag| = " << herm;
    throw std::runtime_error(msg.str());
  }
  double tr = trace();
  if (!(std::abs(tr - 1.0) <= tol * 100)) {
    std::ostringstream msg;
    msg << "state trace " << tr << " differs from 1";
    throw std::runtime_error(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      0.5 * (rho_ + rho_.adjoint()), Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  if (!(lo >= -tol)) {
    std::ostringstream msg;
    msg << "state not positive: min eigenvalue = " << lo;
    throw std::runtime_error(msg.str());
  }
}

}  // namespace circsim::dyn
