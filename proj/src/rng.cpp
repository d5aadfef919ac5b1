#include "rng.hpp"

#include <cmath>

namespace sdefit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint32_t replication,
                                 StreamPurpose purpose) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ (0x100000001ull * replication));
  s = splitmix64(s ^ static_cast<std::uint64_t>(purpose));
  return s;
}

double NormalStream::next_uniform() {
  // 53-bit mantissa, shifted into (0,1].
  return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
}

double NormalStream::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

} // namespace sdefit
