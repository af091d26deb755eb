#pragma once

// Reproducible random streams. A stream is fully determined by its
// (seed, stream_id) pair, so parallel replications can each own one without
// any dependence on scheduling. Uniforms and normals are built by hand from
// raw 64-bit words because the std distributions are implementation-defined.

#include <cstdint>
#include <random>

namespace pspin {

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Standard normal by inverse CDF.
  double normal();
  /// Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace pspin
