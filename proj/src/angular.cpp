#include "circsim/angular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace circsim::ang {

namespace {

// ln(n!) for small n; the couplings handled here never exceed n ~ 10.
double ln_factorial(int n) {
  if (n < 0) throw std::domain_error("ln_factorial: negative argument");
  double s = 0.0;
  for (int k = 2; k <= n; ++k) s += std::log(double(k));
  return s;
}

bool triangle_violated(int two_j1, int two_j2, int two_j3) {
  return two_j3 > two_j1 + two_j2 || two_j3 < std::abs(two_j1 - two_j2) ||
         (two_j1 + two_j2 + two_j3) % 2 != 0;
}

}  // namespace

double wigner3j(int two_j1, int two_j2, int two_j3,
                int two_m1, int two_m2, int two_m3) {
  if (two_m1 + two_m2 + two_m3 != 0) return 0.0;
  if (triangle_violated(two_j1, two_j2, two_j3)) return 0.0;
  if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 ||
      std::abs(two_m3) > two_j3)
    return 0.0;
  if ((two_j1 + two_m1) % 2 != 0 || (two_j2 + two_m2) % 2 != 0 ||
      (two_j3 + two_m3) % 2 != 0)
    return 0.0;

  // Racah formula; all the (j +/- m) combinations below are integers.
  auto half = [](int two_x) { return two_x / 2; };
  int a1 = half(two_j1 + two_j2 - two_j3);
  int a2 = half(two_j1 - two_j2 + two_j3);
  int a3 = half(-two_j1 + two_j2 + two_j3);
  int b1 = half(two_j1 - two_m1), b2 = half(two_j1 + two_m1);
  int c1 = half(two_j2 - two_m2), c2 = half(two_j2 + two_m2);
  int d1 = half(two_j3 - two_m3), d2 = half(two_j3 + two_m3);

  double ln_pref = ln_factorial(a1) + ln_factorial(a2) + ln_factorial(a3) -
                   ln_factorial(half(two_j1 + two_j2 + two_j3) + 1) +
                   ln_factorial(b1) + ln_factorial(b2) + ln_factorial(c1) +
                   ln_factorial(c2) + ln_factorial(d1) + ln_factorial(d2);

  int t_min = std::max({0, half(two_j2 - two_j3 - two_m1),
                        half(two_j1 - two_j3 + two_m2)});
  int t_max = std::min({a1, b1, c2});

  double sum = 0.0;
  for (int t = t_min; t <= t_max; ++t) {
    double ln_den = ln_factorial(t) + ln_factorial(a1 - t) +
                    ln_factorial(b1 - t) + ln_factorial(c2 - t) +
                    ln_factorial(half(two_j3 - two_j2 + two_m1) + t) +
                    ln_factorial(half(two_j3 - two_j1 - two_m2) + t);
    double term = std::exp(0.5 * ln_pref - ln_den);
    sum += (t % 2 == 0 ? term : -term);
  }
  int phase_exp = half(two_j1 - two_j2 - two_m3);
  return (phase_exp % 2 == 0 ? sum : -sum);
}

double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2,
                      int two_J, int two_M) {
  if (two_m1 + two_m2 != two_M) return 0.0;
  double w = wigner3j(two_j1, two_j2, two_J, two_m1, two_m2, -two_M);
  if (w == 0.0) return 0.0;
  int phase_exp = (-two_j1 + two_j2 - two_M) / 2;
  double sign = (phase_exp % 2 == 0) ? 1.0 : -1.0;
  return sign * std::sqrt(double(two_J + 1)) * w;
}

}  // namespace circsim::ang
