#include "pmri/rng.hpp"

#include <cmath>
#include <numbers>

namespace pmri {

namespace {

std::uint64_t splitmix64(std::uint64_t &z)
{
  z += 0x9E3779B97F4A7C15ull;
  std::uint64_t r = z;
  r = (r ^ (r >> 30)) * 0xBF58476D1CE4E5B9ull;
  r = (r ^ (r >> 27)) * 0x94D049BB133111EBull;
  return r ^ (r >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

Rng::Rng(std::uint64_t seed)
{
  std::uint64_t z = seed;
  for (auto &s : s_) {
    s = splitmix64(z);
  }
}

std::uint64_t Rng::next()
{
  std::uint64_t const result = rotl(s_[1] * 5, 7) * 9;
  std::uint64_t const t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return double(next() >> 11) * 0x1.0p-53; }

double Rng::normal()
{
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double const u1 = 1.0 - uniform();
  double const u2 = uniform();
  double const r = std::sqrt(-2.0 * std::log(u1));
  double const t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

} // namespace pmri
