#pragma once

// Counter-based random streams (Philox4x32-10).
//
// A stream is addressed by (seed, stream, substream). Simulation replicate r
// draws from (seed, r, 0) and bootstrap resample b of that replicate from
// (seed, r, b + 1), so results never depend on scheduling.

#include <array>
#include <cstdint>

namespace swedge {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32 block with 10 rounds.
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream = 0, std::uint32_t substream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on (0, 1), 53-bit resolution; never returns 0 or 1.
  double uniform();
  /// Standard normal by inverse CDF.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Uniform integer in [0, bound), bound >= 1, without modulo bias.
  std::uint32_t below(std::uint32_t bound);

 private:
  void refill();

  PhiloxKey key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
};

}  // namespace swedge
