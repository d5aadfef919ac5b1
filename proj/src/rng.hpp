#ifndef SDEFIT_RNG_HPP
#define SDEFIT_RNG_HPP

#include <cstdint>
#include <random>

namespace sdefit {

// Stream purposes for substream derivation. One master seed plus
// (replication, purpose) fully determines every random number drawn, so any
// replication is reproducible in isolation and the Wiener and
// observation-noise streams are independent by construction.
enum class StreamPurpose : std::uint32_t {
  Wiener = 0x57494e52u,   // "WINR"
  ObsNoise = 0x4f425345u, // "OBSE"
  Probe = 0x50524f42u,    // "PROB"
};

/// splitmix64-style mix of (master, replication, purpose) into a stream seed.
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint32_t replication,
                                 StreamPurpose purpose);

/// Standard-normal stream: mt19937_64 (bit-exact per the C++ standard) plus
/// an explicit Box-Muller transform, so output is identical across standard
/// library implementations.
class NormalStream {
public:
  explicit NormalStream(std::uint64_t seed) : eng_(seed) {}

  double next();

  /// Uniform on (0,1].
  double next_uniform();

private:
  std::mt19937_64 eng_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

} // namespace sdefit

#endif
