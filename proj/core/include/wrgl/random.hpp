#pragma once

#include <cstdint>
#include <limits>

namespace wrgl {

/// Counter-based generator: draw n = 1, 2, ... of stream (seed, stream) is
/// splitmix64(key + n * 0x9E3779B97F4A7C15) with key = splitmix64(splitmix64(seed) + stream).
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stream identifiers used by the data generators.
namespace streams {
inline constexpr std::uint64_t kCoordinates = 1;
inline constexpr std::uint64_t kSignals = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kBlockModel = 4;
inline constexpr std::uint64_t kTestSignals = 5;
inline constexpr std::uint64_t kTestNoise = 6;
}  // namespace streams

}  // namespace wrgl
