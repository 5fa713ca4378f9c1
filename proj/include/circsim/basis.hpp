#pragma once

#include <array>
#include <vector>

#include "circsim/atomic_core.hpp"

namespace circsim::dyn {

// Enumerated composite basis: one 8-level ionic-core block per Rydberg
// manifold, in a fixed slot order, optionally followed by one inert sink
// level that models non-circular contaminants of the home manifold.
//
// Level energies are bookkept in GHz in a fixed gauge:
//   E(n, core) = manifold_offset(n) + quadrupole_shift(n, core)/1e6
// where the home manifold (the first one listed) has offset 0 and the other
// offsets are chained through the bare-transition-frequency table, so that
// E(a) - E(b) reproduces transition_frequency_GHz for every supported pair.
// The optical energies of the core terms are gauged away (they are common to
// every manifold and never beat against anything in the simulated dynamics);
// the 5p levels, whose quadrupole shift is out of scope, sit at shift zero.
class Basis {
 public:
  // `manifold_ns`: home manifold first; all must be connected to it through
  // the table. Throws ConfigError if a manifold cannot be chained.
  Basis(std::vector<int> manifold_ns, core::ShiftModel model,
        core::Nu0Table table, bool with_sink = true);

  int dim() const { return dim_; }
  int n_manifolds() const { return static_cast<int>(manifolds_.size()); }
  const std::vector<int>& manifolds() const { return manifolds_; }
  int home_n() const { return manifolds_.front(); }

  bool has_manifold(int n) const;
  int manifold_index(int n) const;  // throws ConfigError if absent
  int block_start(int n) const { return 8 * manifold_index(n); }

  // Fixed slot order of the core levels within each manifold block.
  static const std::array<core::CoreLevel, 8>& core_order();
  static int core_slot(const core::CoreLevel& c);  // 0..7, throws if invalid

  int index_of(const core::CompositeLevel& level) const;  // throws if absent
  const core::CompositeLevel& level_at(int idx) const;

  bool has_sink() const { return with_sink_; }
  int sink_index() const;  // throws ConfigError if no sink

  double energy_GHz(int idx) const { return energy_GHz_[idx]; }
  // Splitting E(n, 4d |mj|=3/2) - E(n, 4d |mj|=1/2) in kHz.
  double manifold_delta_kHz(int n) const;

  const core::ShiftModel& model() const { return model_; }
  const core::Nu0Table& nu0() const { return table_; }

  bool same_layout(const Basis& other) const;

 private:
  std::vector<int> manifolds_;
  core::ShiftModel model_;
  core::Nu0Table table_;
  bool with_sink_;
  int dim_;
  std::vector<core::CompositeLevel> levels_;
  std::vector<double> energy_GHz_;
  std::vector<double> delta_kHz_;
};

}  // namespace circsim::dyn
