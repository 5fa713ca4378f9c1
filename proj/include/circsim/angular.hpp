#pragma once

// Small angular-momentum toolbox: Wigner 3j symbols via the Racah sum and the
// Clebsch-Gordan coefficients derived from them. Arguments are passed as
// doubled integers (two_j = 2j) so half-integer momenta stay exact.

namespace circsim::ang {

// Wigner 3j symbol  ( j1 j2 j3 ; m1 m2 m3 ), arguments doubled.
// Returns 0 for arguments violating triangle or projection rules.
double wigner3j(int two_j1, int two_j2, int two_j3,
                int two_m1, int two_m2, int two_m3);

// <j1 m1; j2 m2 | J M>
double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2,
                      int two_J, int two_M);

}  // namespace circsim::ang
