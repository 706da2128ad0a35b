#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace retasa {

//! Philox4x32-10 counter-based generator (Salmon et al., SC'11). The 64-bit
//! seed is the key and `stream` occupies the upper half of the counter, so
//! (seed, stream) pairs give independent, reproducible sequences without any
//! shared state. Satisfies UniformRandomBitGenerator with 64-bit output.
class Philox
{
public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  //! Raw block function: 10 rounds on (counter, key).
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key);

private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t position_{ 0 };
  std::array<std::uint64_t, 2> buffer_{};
  int available_{ 0 };
};

//! Uniform double strictly inside (0, 1) with 53 random bits.
double uniform_open01(Philox& rng);

//! Stream identifier for replication `rep` and a purpose tag, mixed with
//! SplitMix64 so that nearby indices land far apart.
std::uint64_t derive_stream(std::uint64_t rep, std::uint64_t purpose);

//! Per-replication seed derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t rep);

} // namespace retasa
