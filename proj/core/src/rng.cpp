#include "phenosample/rng.hpp"

namespace phenosample {
namespace {

constexpr uint128 make_u128(std::uint64_t hi, std::uint64_t lo) {
  return (static_cast<uint128>(hi) << 64) | lo;
}

constexpr uint128 kMultiplier = make_u128(0x2360ED051FC65DA4ULL, 0x4385DF649FCCF645ULL);

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Pcg64::Pcg64(std::uint64_t seed, std::uint64_t stream) : state_(0) {
  // Expand both 64-bit inputs to 128 bits, then follow the reference pcg seeding.
  const uint128 init_state = make_u128(splitmix64(seed), splitmix64(seed ^ 0xD1B54A32D192ED03ULL));
  const uint128 init_seq = make_u128(splitmix64(stream), splitmix64(~stream));
  inc_ = (init_seq << 1) | 1u;
  step();
  state_ += init_state;
  step();
}

void Pcg64::step() { state_ = state_ * kMultiplier + inc_; }

Pcg64::result_type Pcg64::operator()() {
  step();
  const auto hi = static_cast<std::uint64_t>(state_ >> 64);
  const auto lo = static_cast<std::uint64_t>(state_);
  const unsigned rot = static_cast<unsigned>(state_ >> 122);
  const std::uint64_t x = hi ^ lo;
  return (x >> rot) | (x << ((64u - rot) & 63u));
}

double Pcg64::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t Pcg64::bounded(std::uint64_t bound) {
  if (bound == 0) return 0;
  uint128 m = static_cast<uint128>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<uint128>((*this)()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ (index * 0x9E3779B97F4A7C15ULL + 1));
}

}  // namespace phenosample
