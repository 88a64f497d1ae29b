#include "perfshift/rng.hpp"

#include <cmath>

namespace perfshift::rng {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer: bijective, full avalanche.
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t bits(const DrawKey& key, std::uint64_t salt) {
  // Absorb-permute chain over (seed, stream, index, salt).
  std::uint64_t h = mix(key.seed ^ kGolden);
  h = mix(h ^ (key.stream + kGolden));
  h = mix(h ^ (key.index + kGolden));
  h = mix(h ^ (salt + kGolden));
  return h;
}

double uniform01(const DrawKey& key, std::uint64_t salt) {
  return static_cast<double>(bits(key, salt) >> 11) * 0x1.0p-53;
}

bool bernoulli(const DrawKey& key, double p, std::uint64_t salt) {
  return uniform01(key, salt) < p;
}

double standard_normal(const DrawKey& key) {
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform01(key, 0xB0);
  const double u2 = uniform01(key, 0xB1);
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace perfshift::rng
