#pragma once

#include <cstdint>

namespace organic {

/// Counter-based random stream. Draw j of stream (seed, id) is a pure
/// function of (seed, id, j), so units or bootstrap replicates can be
/// generated in any order and still reproduce the sequential output.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(mix(mix(seed + 0x9e3779b97f4a7c15ULL) ^
                 mix(stream_id + 0xd1b54a32d192ed03ULL))) {}

  std::uint64_t bits(std::uint64_t slot) const {
    return mix(key_ + (slot + 1) * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on the open interval (0,1); endpoints excluded so inverse-CDF
  /// transforms stay finite.
  double uniform(std::uint64_t slot) const {
    return (static_cast<double>(bits(slot) >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
};

}  // namespace organic
