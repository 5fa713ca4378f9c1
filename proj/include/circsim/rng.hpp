#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace circsim::seq {

// Deterministic, platform-stable randomness for shot sampling. Seeds are
// derived by hashing (global seed, sequence id, point index, branch index)
// so reruns with the same inputs are bit-identical.

std::uint64_t fnv1a64(std::string_view s);

// SplitMix64 step; also used as the avalanche when combining keys.
std::uint64_t splitmix64_next(std::uint64_t& state);

std::uint64_t mix_keys(std::initializer_list<std::uint64_t> keys);

std::mt19937_64 seeded_engine(std::initializer_list<std::uint64_t> keys);

// Uniform in [0, 1) built directly from the top 53 bits of the engine
// output; std::uniform_real_distribution is implementation-defined and
// would break cross-platform reproducibility.
double uniform01(std::mt19937_64& g);

// Sum of Bernoulli draws; exact and stable for the shot counts we use.
int sample_binomial(std::mt19937_64& g, int n, double p);

// Standard error of a binomial rate estimate with a (k+1)/(n+2) shrinkage
// point so that k = 0 and k = n still get a nonzero error bar.
double binomial_se(int successes, int trials);

}  // namespace circsim::seq
