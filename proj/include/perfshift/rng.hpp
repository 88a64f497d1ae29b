#pragma once

#include <cstdint>

namespace perfshift::rng {

/// Addresses a single random draw as (seed, stream, index).
///
/// Every draw is a pure function of its key, so sample element i is
/// reproducible no matter how many elements are consumed and sampling can be
/// partitioned across threads by index range.
struct DrawKey {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t index = 0;
};

/// 64 uniformly mixed bits for the given key. `salt` derives extra
/// independent draws from the same key (used when one variable needs more
/// than one underlying uniform).
std::uint64_t bits(const DrawKey& key, std::uint64_t salt = 0);

/// Uniform double in [0, 1) with 53-bit resolution.
double uniform01(const DrawKey& key, std::uint64_t salt = 0);

/// True with probability p.
bool bernoulli(const DrawKey& key, double p, std::uint64_t salt = 0);

/// Standard normal draw (Box-Muller over two salted uniforms).
double standard_normal(const DrawKey& key);

/// Stream ids used by the sampler and the experiment driver. Decision draws
/// at sweep point j use stream `decision_base + j`.
namespace stream {
inline constexpr std::uint64_t group = 0;
inline constexpr std::uint64_t x1 = 1;
inline constexpr std::uint64_t x2 = 2;
inline constexpr std::uint64_t y0 = 3;
inline constexpr std::uint64_t y1 = 4;
inline constexpr std::uint64_t train_decision = 5;
inline constexpr std::uint64_t decision_base = 16;
}  // namespace stream

}  // namespace perfshift::rng
