#pragma once

#include <compare>
#include <map>
#include <string>
#include <utility>

namespace circsim::core {

// ---------------------------------------------------------------------------
// Level labels
// ---------------------------------------------------------------------------

enum class RydbergKind { circular, elliptical_marker };

// One Rydberg electron level. `circular` means l = m = n-1; the
// elliptical_marker kind tags inert non-circular population of the same
// manifold (detection contaminant / unaccounted loss), which the coherent
// drives never address.
struct RydbergLevel {
  int n = 0;
  RydbergKind kind = RydbergKind::circular;
  auto operator<=>(const RydbergLevel&) const = default;
};

enum class CoreTerm { s5_half, p5_half, d4_threehalf };

// Ionic-core level: term plus magnetic quantum number, stored doubled
// (two_mj = 2*mj) so half-integers stay exact.
struct CoreLevel {
  CoreTerm term = CoreTerm::s5_half;
  int two_mj = 1;
  auto operator<=>(const CoreLevel&) const = default;
};

struct CompositeLevel {
  RydbergLevel rydberg;
  CoreLevel core;
  auto operator<=>(const CompositeLevel&) const = default;
};

bool core_level_valid(const CoreLevel& c);
std::string to_string(const CoreLevel& c);
std::string to_string(const CompositeLevel& l);

// ---------------------------------------------------------------------------
// Quadrupole-coupled level shifts
// ---------------------------------------------------------------------------

// How the n-dependence of the splitting is computed:
//   exact_hydrogenic : quadrupole term from the closed-form circular-state
//                      gradient times theta, plus the small dipole term
//                      C * (ref_n/n)^8
//   power_law        : B * (ref_n/n)^6 + C * (ref_n/n)^8 with B supplied
//                      (as obtained from fitting measured splittings)
enum class ShiftMode { exact_hydrogenic, power_law };

struct ShiftModel {
  double theta = 2.029;      // core quadrupole moment <Q20>, atomic units
  double dipole_C_kHz = -2.7;  // second-order dipole coefficient at ref_n
  int reference_n = 51;
  ShiftMode mode = ShiftMode::exact_hydrogenic;
  double B_kHz = 757.0;      // used by power_law only
};

// <(3cos^2(theta)-1)/r^3> magnitude for the circular state |n, n-1, n-1>,
// atomic units. Closed form 4 / (n^4 (4n^2-1)). Throws std::domain_error for
// n < 2 (no circular state below n = 2).
double circular_gradient(int n);

// First-order quadrupole splitting delta_n = gradient * theta (converted to
// kHz). Linear in theta; theta must be > 0.
double quadrupole_delta_kHz(int n, double theta);

// Full splitting including the dipole correction, per the model's mode.
double total_delta_kHz(const ShiftModel& model, int n);

// Signed level shift in kHz: +delta_n/2 for |mj| = 3/2 of the 4d core,
// -delta_n/2 for |mj| = 1/2, 0 for the 5s core. p5_half input throws
// std::invalid_argument (not modeled). Elliptical-marker levels shift 0.
double level_shift_kHz(const CompositeLevel& level, const ShiftModel& model);

// ---------------------------------------------------------------------------
// Transition frequencies
// ---------------------------------------------------------------------------

// Bare (shift-free) transition frequencies between circular manifolds, GHz,
// keyed on the unordered manifold pair.
class Nu0Table {
 public:
  void set(int n_a, int n_b, double nu_GHz);
  bool has(int n_a, int n_b) const;
  // Throws std::out_of_range (message names the pair) when absent.
  double get(int n_a, int n_b) const;
  const std::map<std::pair<int, int>, double>& entries() const { return map_; }

 private:
  static std::pair<int, int> key(int n_a, int n_b);
  std::map<std::pair<int, int>, double> map_;
};

// Table pre-filled with the default transitions used by the shipped recipes.
Nu0Table default_nu0_table();

// Frequency of the a <-> b transition in GHz, bare value plus the difference
// of the two endpoint level shifts (shift of the higher-energy endpoint minus
// shift of the lower one, so the value is the spectroscopic resonance).
// Supported pairs: same core state across two manifolds (microwave), or same
// manifold within the 4d core (effective two-photon transition, bare = 0).
// Throws std::invalid_argument for unsupported pairs, std::out_of_range for
// a missing table entry.
double transition_frequency_GHz(const CompositeLevel& a, const CompositeLevel& b,
                                const ShiftModel& model, const Nu0Table& table);

// ---------------------------------------------------------------------------
// Core optical line strengths
// ---------------------------------------------------------------------------

// q = -1, 0, +1 (sigma-, pi, sigma+)
enum class Polarization { sigma_minus, pi, sigma_plus };

// Relative dipole line strength |<to, q | from>|^2 between core levels, from
// squared Clebsch-Gordan coefficients, normalized so that for each p5_half
// sublevel the strengths summed over polarization and lower sublevels equal 1
// per lower term (separately for 5s and 4d). Forbidden combinations give 0.
double core_line_strength(Polarization q, const CoreLevel& from,
                          const CoreLevel& to);

}  // namespace circsim::core
