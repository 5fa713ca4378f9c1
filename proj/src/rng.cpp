#include "circsim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace circsim::seq {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t mix_keys(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t state = 0x6a09e667f3bcc909ull;
  std::uint64_t out = 0;
  for (std::uint64_t k : keys) {
    state ^= k;
    out = splitmix64_next(state);
  }
  return out;
}

std::mt19937_64 seeded_engine(std::initializer_list<std::uint64_t> keys) {
  return std::mt19937_64(mix_keys(keys));
}

double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

int sample_binomial(std::mt19937_64& g, int n, double p) {
  if (n < 0) throw std::invalid_argument("binomial trials must be >= 0");
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  int k = 0;
  for (int i = 0; i < n; ++i) {
    if (uniform01(g) < p) ++k;
  }
  return k;
}

double binomial_se(int successes, int trials) {
  if (trials <= 0) return 0.0;
  double p = (successes + 1.0) / (trials + 2.0);
  return std::sqrt(p * (1.0 - p) / trials);
}

}  // namespace circsim::seq
