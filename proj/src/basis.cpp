#include "circsim/basis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

#include "circsim/errors.hpp"

namespace circsim::dyn {

namespace {

const char* term_name(core::CoreTerm t) {
  switch (t) {
    case core::CoreTerm::s5_half: return "5s1/2";
    case core::CoreTerm::p5_half: return "5p1/2";
    case core::CoreTerm::d4_threehalf: return "4d3/2";
  }
  return "?";
}

}  // namespace

const std::array<core::CoreLevel, 8>& Basis::core_order() {
  static const std::array<core::CoreLevel, 8> order = {{
      {core::CoreTerm::s5_half, -1},
      {core::CoreTerm::s5_half, +1},
      {core::CoreTerm::p5_half, -1},
      {core::CoreTerm::p5_half, +1},
      {core::CoreTerm::d4_threehalf, -3},
      {core::CoreTerm::d4_threehalf, -1},
      {core::CoreTerm::d4_threehalf, +1},
      {core::CoreTerm::d4_threehalf, +3},
  }};
  return order;
}

int Basis::core_slot(const core::CoreLevel& c) {
  const auto& order = core_order();
  for (int i = 0; i < 8; ++i) {
    if (order[i].term == c.term && order[i].two_mj == c.two_mj) return i;
  }
  std::ostringstream msg;
  msg << "invalid core level: " << term_name(c.term)
      << " with 2*mj=" << c.two_mj;
  throw ConfigError(msg.str());
}

Basis::Basis(std::vector<int> manifold_ns, core::ShiftModel model,
             core::Nu0Table table, bool with_sink)
    : manifolds_(std::move(manifold_ns)),
      model_(model),
      table_(std::move(table)),
      with_sink_(with_sink) {
  if (manifolds_.empty()) throw ConfigError("basis needs at least one manifold");
  for (size_t i = 0; i < manifolds_.size(); ++i) {
    for (size_t j = i + 1; j < manifolds_.size(); ++j) {
      if (manifolds_[i] == manifolds_[j]) {
        std::ostringstream msg;
        msg << "duplicate manifold n=" << manifolds_[i];
        throw ConfigError(msg.str());
      }
    }
  }

  // Chain manifold offsets from the home manifold through the transition
  // table: offset(hi) = offset(lo) + nu0(hi, lo).
  std::map<int, double> offset;
  offset[manifolds_.front()] = 0.0;
  std::deque<int> queue = {manifolds_.front()};
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    for (int other : manifolds_) {
      if (offset.count(other) || !table_.has(cur, other)) continue;
      double nu0 = table_.get(cur, other);
      int hi = std::max(cur, other), lo = std::min(cur, other);
      offset[other] = (other == hi) ? offset[lo] + nu0 : offset[hi] - nu0;
      queue.push_back(other);
    }
  }
  for (int n : manifolds_) {
    if (!offset.count(n)) {
      std::ostringstream msg;
      msg << "manifold n=" << n
          << " is not connected to the home manifold n=" << manifolds_.front()
          << " through the transition-frequency table";
      throw ConfigError(msg.str());
    }
  }

  dim_ = 8 * static_cast<int>(manifolds_.size()) + (with_sink_ ? 1 : 0);
  levels_.reserve(dim_);
  energy_GHz_.reserve(dim_);
  delta_kHz_.reserve(manifolds_.size());
  for (int n : manifolds_) {
    delta_kHz_.push_back(core::total_delta_kHz(model_, n));
    for (const auto& c : core_order()) {
      core::CompositeLevel lv{{n, core::RydbergKind::circular}, c};
      levels_.push_back(lv);
      double shift_kHz = (c.term == core::CoreTerm::p5_half)
                             ? 0.0
                             : core::level_shift_kHz(lv, model_);
      energy_GHz_.push_back(offset[n] + shift_kHz * 1e-6);
    }
  }
  if (with_sink_) {
    core::CompositeLevel sink{{manifolds_.front(), core::RydbergKind::elliptical_marker},
                              {core::CoreTerm::s5_half, +1}};
    levels_.push_back(sink);
    energy_GHz_.push_back(0.0);
  }
}

bool Basis::has_manifold(int n) const {
  return std::find(manifolds_.begin(), manifolds_.end(), n) != manifolds_.end();
}

int Basis::manifold_index(int n) const {
  for (size_t i = 0; i < manifolds_.size(); ++i) {
    if (manifolds_[i] == n) return static_cast<int>(i);
  }
  std::ostringstream msg;
  msg << "manifold n=" << n << " is not part of this basis";
  throw ConfigError(msg.str());
}

int Basis::index_of(const core::CompositeLevel& level) const {
  if (level.rydberg.kind == core::RydbergKind::elliptical_marker) {
    if (with_sink_ && level.rydberg.n == manifolds_.front() &&
        level.core.term == core::CoreTerm::s5_half && level.core.two_mj == +1) {
      return dim_ - 1;
    }
    throw ConfigError("level not in basis: only the home-manifold marker sink is enumerated");
  }
  return block_start(level.rydberg.n) + core_slot(level.core);
}

const core::CompositeLevel& Basis::level_at(int idx) const {
  if (idx < 0 || idx >= dim_) {
    std::ostringstream msg;
    msg << "basis index " << idx << " out of range [0, " << dim_ << ")";
    throw ConfigError(msg.str());
  }
  return levels_[idx];
}

int Basis::sink_index() const {
  if (!with_sink_) throw ConfigError("basis has no sink level");
  return dim_ - 1;
}

double Basis::manifold_delta_kHz(int n) const {
  return delta_kHz_[manifold_index(n)];
}

bool Basis::same_layout(const Basis& other) const {
  return manifolds_ == other.manifolds_ && with_sink_ == other.with_sink_;
}

}  // namespace circsim::dyn
