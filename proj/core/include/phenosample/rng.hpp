#pragma once

#include <cstdint>
#include <limits>

namespace phenosample {

__extension__ typedef unsigned __int128 uint128;

/// PCG-XSL-RR 128/64 ("pcg64"). Output sequences are fully specified by the
/// seed and stream, so draws are reproducible across platforms and compilers.
/// Satisfies UniformRandomBitGenerator.
class Pcg64 {
 public:
  using result_type = std::uint64_t;

  explicit Pcg64(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound). Unbiased (Lemire's multiply-and-reject).
  std::uint64_t bounded(std::uint64_t bound);

 private:
  void step();

  uint128 state_;
  uint128 inc_;
};

/// SplitMix64 finaliser. Used to derive independent per-worker seeds from a base
/// seed, so a worker's stream depends only on (base, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace phenosample
