#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace fdsurvey {

/// Purpose tags so that streams drawn for different jobs from the same master
/// seed never overlap.
enum class StreamPurpose : std::uint64_t {
  kAuxiliary = 1,
  kResidual = 2,
  kSampleDraw = 3,
  kBandSimulation = 4,
  kGeneric = 5,
};

/// SplitMix64 finalizer applied to (master, purpose, index). Streams keyed
/// this way are independent of the order in which they are created.
std::uint64_t derive_seed(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t index);

/// A reproducible random stream. The engine is std::mt19937_64 (its output
/// sequence is fixed by the standard); uniforms and normals are produced by
/// explicit code here instead of the implementation-defined std
/// distributions, so a seed gives the same numbers on every platform:
///   uniform(): top 53 bits of one engine word, scaled into [0, 1);
///   normal():  Marsaglia polar method, spare value cached;
///   index(b):  rejection sampling on full 64-bit words, unbiased.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t index)
      : engine_(derive_seed(master_seed, purpose, index)) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal();
  std::size_t index(std::size_t bound);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fdsurvey
