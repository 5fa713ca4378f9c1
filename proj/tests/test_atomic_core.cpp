#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "circsim/atomic_core.hpp"
#include "circsim/units.hpp"
#include "oracles.hpp"

using namespace circsim;
using namespace circsim::core;

namespace {
const CoreLevel s_up{CoreTerm::s5_half, +1};
const CoreLevel s_dn{CoreTerm::s5_half, -1};
const CoreLevel p_up{CoreTerm::p5_half, +1};
const CoreLevel p_dn{CoreTerm::p5_half, -1};
CoreLevel d(int two_mj) { return {CoreTerm::d4_threehalf, two_mj}; }
CompositeLevel circ(int n, CoreLevel c) {
  return {{n, RydbergKind::circular}, c};
}

ShiftModel power_law_model() {
  ShiftModel m;
  m.mode = ShiftMode::power_law;
  m.B_kHz = 757.0;
  m.dipole_C_kHz = -2.7;
  return m;
}
}  // namespace

TEST_CASE("circular-state gradient matches the quadrature oracle to 1e-9") {
  for (int n = 2; n <= 80; ++n) {
    double q = oracle::circular_gradient_quadrature(n);
    double c = circular_gradient(n);
    CHECK(std::abs(c - q) / q < 1e-9);
  }
}

TEST_CASE("gradient frozen values and domain") {
  CHECK(circular_gradient(51) == doctest::Approx(5.683563132e-11).epsilon(1e-9));
  CHECK(circular_gradient(2) == doctest::Approx(1.0 / 60.0).epsilon(1e-12));
  CHECK_THROWS_AS(circular_gradient(1), std::domain_error);
  CHECK_THROWS_AS(circular_gradient(0), std::domain_error);
  CHECK_THROWS_AS(circular_gradient(-5), std::domain_error);
}

TEST_CASE("quadrupole splitting: value, linearity, monotonicity") {
  // published-theta check point
  CHECK(quadrupole_delta_kHz(51, 2.029) ==
        doctest::Approx(758.765833).epsilon(1e-9));
  CHECK(std::abs(quadrupole_delta_kHz(51, 2.029) - 759.0) < 1.5);

  // linear in theta
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    double th = 0.1 + 5.0 * (rng() >> 11) * 0x1p-53;
    double k = 1.0 + 9.0 * (rng() >> 11) * 0x1p-53;
    double a = quadrupole_delta_kHz(51, th);
    double b = quadrupole_delta_kHz(51, k * th);
    CHECK(b == doctest::Approx(k * a).epsilon(1e-12));
  }

  // strictly decreasing in n
  for (int n = 2; n < 80; ++n)
    CHECK(quadrupole_delta_kHz(n + 1, 2.0) < quadrupole_delta_kHz(n, 2.0));

  CHECK_THROWS_AS(quadrupole_delta_kHz(51, 0.0), std::domain_error);
  CHECK_THROWS_AS(quadrupole_delta_kHz(51, -1.0), std::domain_error);
}

TEST_CASE("gradient ratios track (51/n)^6 to below 1%") {
  double g51 = quadrupole_delta_kHz(51, 2.0);
  for (int n : {49, 50, 53}) {
    double ratio = quadrupole_delta_kHz(n, 2.0) / g51;
    double power = std::pow(51.0 / n, 6);
    CHECK(std::abs(ratio / power - 1.0) < 0.01);
  }
}

TEST_CASE("total splitting in both modes") {
  ShiftModel pl = power_law_model();
  CHECK(total_delta_kHz(pl, 51) == doctest::Approx(754.3).epsilon(1e-12));
  CHECK(total_delta_kHz(pl, 49) == doctest::Approx(958.648006).epsilon(1e-8));
  CHECK(total_delta_kHz(pl, 50) == doctest::Approx(849.341471).epsilon(1e-8));
  CHECK(total_delta_kHz(pl, 53) == doctest::Approx(598.997545).epsilon(1e-8));

  double split = total_delta_kHz(pl, 49) - total_delta_kHz(pl, 51);
  CHECK(split == doctest::Approx(204.348006).epsilon(1e-8));
  CHECK(std::abs(split - 204.4) < 0.2);   // model value
  CHECK(std::abs(split - 202.0) < 6.0);   // within 3 sigma of measurement

  ShiftModel ex;  // exact_hydrogenic default
  ex.theta = 2.029;
  double expected = quadrupole_delta_kHz(49, 2.029) +
                    (-2.7) * std::pow(51.0 / 49.0, 8);
  CHECK(total_delta_kHz(ex, 49) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("level shifts: signs, zero cases, traceless quartet, errors") {
  ShiftModel pl = power_law_model();
  double half = 0.5 * total_delta_kHz(pl, 51);

  CHECK(level_shift_kHz(circ(51, d(+3)), pl) == doctest::Approx(+half));
  CHECK(level_shift_kHz(circ(51, d(-3)), pl) == doctest::Approx(+half));
  CHECK(level_shift_kHz(circ(51, d(+1)), pl) == doctest::Approx(-half));
  CHECK(level_shift_kHz(circ(51, d(-1)), pl) == doctest::Approx(-half));
  CHECK(level_shift_kHz(circ(51, s_up), pl) == 0.0);
  CHECK(level_shift_kHz(circ(51, s_dn), pl) == 0.0);

  double sum = 0.0;
  for (int two_mj : {-3, -1, 1, 3}) sum += level_shift_kHz(circ(51, d(two_mj)), pl);
  CHECK(std::abs(sum) < 1e-12);

  CHECK_THROWS_AS(level_shift_kHz(circ(51, p_up), pl), std::invalid_argument);

  CompositeLevel sink{{51, RydbergKind::elliptical_marker}, s_up};
  CHECK(level_shift_kHz(sink, pl) == 0.0);
}

TEST_CASE("transition frequencies against the published lines") {
  ShiftModel pl = power_law_model();
  Nu0Table tab = default_nu0_table();

  double nu32 = transition_frequency_GHz(circ(51, d(+3)), circ(49, d(+3)), pl, tab);
  double nu12 = transition_frequency_GHz(circ(51, d(+1)), circ(49, d(+1)), pl, tab);
  double nu0s = transition_frequency_GHz(circ(51, s_up), circ(49, s_up), pl, tab);

  CHECK(nu0s == doctest::Approx(105.357546).epsilon(1e-12));
  CHECK(nu32 == doctest::Approx(105.357443826).epsilon(1e-11));
  CHECK(nu12 == doctest::Approx(105.357648174).epsilon(1e-11));
  // published: 105.357444(1) and 105.357647(1); model lands within 2 kHz
  CHECK(std::abs(nu32 - 105.357444) < 2e-6);
  CHECK(std::abs(nu12 - 105.357647) < 2e-6);

  // symmetric about the 5s line to float precision
  CHECK(std::abs(nu32 + nu12 - 2.0 * nu0s) < 1e-12);

  // direction independence
  CHECK(transition_frequency_GHz(circ(49, d(+3)), circ(51, d(+3)), pl, tab) ==
        doctest::Approx(nu32).epsilon(1e-15));

  // within-manifold 4d pair: the splitting itself
  double split = transition_frequency_GHz(circ(51, d(+3)), circ(51, d(+1)), pl, tab);
  CHECK(split * kHz_per_GHz == doctest::Approx(total_delta_kHz(pl, 51)));
  CHECK(transition_frequency_GHz(circ(51, d(+3)), circ(51, d(-3)), pl, tab) == 0.0);

  // errors
  CHECK_THROWS_AS(
      transition_frequency_GHz(circ(51, s_up), circ(52, s_up), pl, tab),
      std::out_of_range);
  CHECK_THROWS_AS(
      transition_frequency_GHz(circ(51, s_up), circ(49, s_dn), pl, tab),
      std::invalid_argument);
  CHECK_THROWS_AS(
      transition_frequency_GHz(circ(51, s_up), circ(51, d(+1)), pl, tab),
      std::invalid_argument);
}

TEST_CASE("core line strengths: frozen CG^2 values") {
  // 4d3/2 <-> 5p1/2
  CHECK(core_line_strength(Polarization::sigma_minus, d(+3), p_up) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(core_line_strength(Polarization::sigma_plus, d(-3), p_dn) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(core_line_strength(Polarization::pi, d(+1), p_up) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(core_line_strength(Polarization::pi, d(-1), p_dn) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(core_line_strength(Polarization::sigma_plus, d(-1), p_up) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(core_line_strength(Polarization::sigma_minus, d(+1), p_dn) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  // 5s1/2 <-> 5p1/2
  CHECK(core_line_strength(Polarization::pi, s_up, p_up) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(core_line_strength(Polarization::sigma_plus, s_dn, p_up) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // pi-polarized light cannot reach 5p from the stretched 4d sublevels
  CHECK(core_line_strength(Polarization::pi, d(+3), p_up) == 0.0);
  CHECK(core_line_strength(Polarization::pi, d(+3), p_dn) == 0.0);
  CHECK(core_line_strength(Polarization::pi, d(-3), p_up) == 0.0);
  CHECK(core_line_strength(Polarization::pi, d(-3), p_dn) == 0.0);

  // forbidden term pairs are 0, not errors
  CHECK(core_line_strength(Polarization::pi, s_up, d(+1)) == 0.0);
  CHECK(core_line_strength(Polarization::pi, s_up, s_dn) == 0.0);
}

TEST_CASE("line-strength sum rules per lower term") {
  auto polar = {Polarization::sigma_minus, Polarization::pi,
                Polarization::sigma_plus};
  for (const CoreLevel& p : {p_up, p_dn}) {
    double to_s = 0.0, to_d = 0.0;
    for (auto q : polar) {
      for (int m : {-1, 1}) to_s += core_line_strength(q, p, {CoreTerm::s5_half, m});
      for (int m : {-3, -1, 1, 3})
        to_d += core_line_strength(q, p, {CoreTerm::d4_threehalf, m});
    }
    CHECK(to_s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(to_d == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("strength symmetry between absorption and emission labeling") {
  // |CG|^2 must not depend on which endpoint is passed first
  for (int md : {-3, -1, 1, 3})
    for (const CoreLevel& p : {p_up, p_dn})
      for (auto q : {Polarization::sigma_minus, Polarization::pi,
                     Polarization::sigma_plus}) {
        double up = core_line_strength(q, d(md), p);
        // reversed direction carries the opposite polarization label
        auto qr = (q == Polarization::pi) ? Polarization::pi
                  : (q == Polarization::sigma_minus) ? Polarization::sigma_plus
                                                     : Polarization::sigma_minus;
        double down = core_line_strength(qr, p, d(md));
        CHECK(up == doctest::Approx(down).epsilon(1e-14));
      }
}
