#pragma once

#include <cstdint>

namespace pmri {

/*
 * Portable seeded generator so every language port reproduces identical streams.
 *
 *   state init : four successive SplitMix64 outputs of `seed`
 *                (z += 0x9E3779B97F4A7C15; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
 *                 z = (z ^ z>>27) * 0x94D049BB133111EB; return z ^ z>>31)
 *   next()     : xoshiro256** 1.0  (result = rotl(s1 * 5, 7) * 9; t = s1 << 17;
 *                 s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45))
 *   uniform()  : (next() >> 11) * 2^-53, in [0, 1)
 *   normal()   : Box-Muller on u1 = 1 - uniform(), u2 = uniform();
 *                returns sqrt(-2 ln u1) cos(2 pi u2), then sqrt(-2 ln u1) sin(2 pi u2) on the next call
 */
class Rng
{
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace pmri
