#include "circsim/atomic_core.hpp"

#include <cmath>
#include <stdexcept>

#include "circsim/angular.hpp"
#include "circsim/units.hpp"

namespace circsim::core {

bool core_level_valid(const CoreLevel& c) {
  int max2 = (c.term == CoreTerm::d4_threehalf) ? 3 : 1;
  return std::abs(c.two_mj) <= max2 && std::abs(c.two_mj) % 2 == 1;
}

std::string to_string(const CoreLevel& c) {
  const char* t = c.term == CoreTerm::s5_half     ? "5s1/2"
                  : c.term == CoreTerm::p5_half   ? "5p1/2"
                                                  : "4d3/2";
  return std::string(t) + " mj=" + std::to_string(c.two_mj) + "/2";
}

std::string to_string(const CompositeLevel& l) {
  std::string r = std::to_string(l.rydberg.n) +
                  (l.rydberg.kind == RydbergKind::circular ? "c" : "e");
  return r + "," + to_string(l.core);
}

// ---------------------------------------------------------------------------

double circular_gradient(int n) {
  if (n < 2) throw std::domain_error("circular_gradient: n must be >= 2");
  // <r^-3>_{n,l=n-1} * |<3cos^2-1>_{l,m=l}| = 4 / (n^4 (4n^2 - 1))
  double nd = n;
  return 4.0 / (nd * nd * nd * nd * (4.0 * nd * nd - 1.0));
}

double quadrupole_delta_kHz(int n, double theta) {
  if (theta <= 0.0)
    throw std::domain_error("quadrupole_delta: theta must be positive");
  return circular_gradient(n) * theta * hartree_kHz;
}

double total_delta_kHz(const ShiftModel& model, int n) {
  double r = double(model.reference_n) / double(n);
  double r2 = r * r;
  double r6 = r2 * r2 * r2;
  double r8 = r6 * r2;
  switch (model.mode) {
    case ShiftMode::exact_hydrogenic:
      return quadrupole_delta_kHz(n, model.theta) + model.dipole_C_kHz * r8;
    case ShiftMode::power_law:
      return model.B_kHz * r6 + model.dipole_C_kHz * r8;
  }
  throw std::logic_error("total_delta: unknown mode");
}

double level_shift_kHz(const CompositeLevel& level, const ShiftModel& model) {
  if (!core_level_valid(level.core))
    throw std::invalid_argument("level_shift: invalid core level " +
                                to_string(level.core));
  if (level.rydberg.kind != RydbergKind::circular) return 0.0;
  switch (level.core.term) {
    case CoreTerm::s5_half:
      return 0.0;
    case CoreTerm::p5_half:
      throw std::invalid_argument(
          "level_shift: shift of the 5p1/2 core is not modeled");
    case CoreTerm::d4_threehalf: {
      double half_delta = 0.5 * total_delta_kHz(model, level.rydberg.n);
      return std::abs(level.core.two_mj) == 3 ? +half_delta : -half_delta;
    }
  }
  throw std::logic_error("level_shift: unknown core term");
}

// ---------------------------------------------------------------------------

std::pair<int, int> Nu0Table::key(int n_a, int n_b) {
  return {std::min(n_a, n_b), std::max(n_a, n_b)};
}

void Nu0Table::set(int n_a, int n_b, double nu_GHz) {
  if (n_a == n_b)
    throw std::invalid_argument("Nu0Table: manifold pair must differ");
  map_[key(n_a, n_b)] = nu_GHz;
}

bool Nu0Table::has(int n_a, int n_b) const {
  return map_.count(key(n_a, n_b)) > 0;
}

double Nu0Table::get(int n_a, int n_b) const {
  auto it = map_.find(key(n_a, n_b));
  if (it == map_.end())
    throw std::out_of_range("Nu0Table: no entry for manifold pair (" +
                            std::to_string(n_a) + "," + std::to_string(n_b) +
                            ")");
  return it->second;
}

Nu0Table default_nu0_table() {
  Nu0Table t;
  t.set(51, 49, 105.357546);  // two-photon transition-frame frequency
  t.set(51, 50, 51.098516);   // one-photon
  // hydrogenic 1/n^2-difference scaling of the (51,49) entry
  t.set(53, 51, 93.656820);
  return t;
}

double transition_frequency_GHz(const CompositeLevel& a, const CompositeLevel& b,
                                const ShiftModel& model, const Nu0Table& table) {
  if (a.rydberg.kind != RydbergKind::circular ||
      b.rydberg.kind != RydbergKind::circular)
    throw std::invalid_argument(
        "transition_frequency: endpoints must be circular levels");

  if (a.rydberg.n != b.rydberg.n && a.core == b.core) {
    // microwave transition between manifolds, core untouched
    double nu0 = table.get(a.rydberg.n, b.rydberg.n);
    const CompositeLevel& hi = (a.rydberg.n > b.rydberg.n) ? a : b;
    const CompositeLevel& lo = (a.rydberg.n > b.rydberg.n) ? b : a;
    double dshift_kHz =
        level_shift_kHz(hi, model) - level_shift_kHz(lo, model);
    return nu0 + dshift_kHz / kHz_per_GHz;
  }

  if (a.rydberg.n == b.rydberg.n &&
      a.core.term == CoreTerm::d4_threehalf &&
      b.core.term == CoreTerm::d4_threehalf) {
    // two-photon transition between 4d sublevels of one manifold: the
    // splitting itself (higher-shifted endpoint minus lower)
    double da = level_shift_kHz(a, model);
    double db = level_shift_kHz(b, model);
    return std::abs(da - db) / kHz_per_GHz;
  }

  throw std::invalid_argument(
      "transition_frequency: unsupported endpoint pair " + to_string(a) +
      " <-> " + to_string(b));
}

// ---------------------------------------------------------------------------

namespace {

int two_j_of(CoreTerm t) { return t == CoreTerm::d4_threehalf ? 3 : 1; }

bool dipole_allowed(CoreTerm from, CoreTerm to) {
  // electric-dipole paths within the modeled core levels
  bool a = (from == CoreTerm::s5_half && to == CoreTerm::p5_half);
  bool b = (from == CoreTerm::p5_half && to == CoreTerm::s5_half);
  bool c = (from == CoreTerm::d4_threehalf && to == CoreTerm::p5_half);
  bool d = (from == CoreTerm::p5_half && to == CoreTerm::d4_threehalf);
  return a || b || c || d;
}

}  // namespace

double core_line_strength(Polarization q, const CoreLevel& from,
                          const CoreLevel& to) {
  if (!core_level_valid(from) || !core_level_valid(to))
    throw std::invalid_argument("core_line_strength: invalid core level");
  if (!dipole_allowed(from.term, to.term)) return 0.0;

  int two_q = (q == Polarization::sigma_minus) ? -2
              : (q == Polarization::pi)        ? 0
                                               : 2;
  if (from.two_mj + two_q != to.two_mj) return 0.0;

  // The strength is |<j_low m_low; 1 dm | j_up m_up>|^2 with the photon always
  // coupled to the lower level, whichever way the endpoints were passed; this
  // is what makes the strengths from any 5p sublevel sum to 1 per lower term.
  // Among the modeled terms 5p is always the upper endpoint.
  const CoreLevel& up = (from.term == CoreTerm::p5_half) ? from : to;
  const CoreLevel& low = (from.term == CoreTerm::p5_half) ? to : from;
  double cg = ang::clebsch_gordan(two_j_of(low.term), low.two_mj, 2,
                                  up.two_mj - low.two_mj, two_j_of(up.term),
                                  up.two_mj);
  return cg * cg;
}

}  // namespace circsim::core
