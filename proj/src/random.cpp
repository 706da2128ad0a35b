#include "retasa/random.hpp"

namespace retasa {
namespace {

constexpr std::uint32_t mul0 = 0xD2511F53u;
constexpr std::uint32_t mul1 = 0xCD9E8D57u;
constexpr std::uint32_t weyl0 = 0x9E3779B9u;
constexpr std::uint32_t weyl1 = 0xBB67AE85u;

std::uint64_t
splitmix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

} // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream)
  : key_{ static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32) }
  , stream_(stream)
{}

std::array<std::uint32_t, 4>
Philox::block(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key)
{
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(mul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(mul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = { hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0 };
    key[0] += weyl0;
    key[1] += weyl1;
  }
  return ctr;
}

void
Philox::refill()
{
  const std::array<std::uint32_t, 4> ctr{ static_cast<std::uint32_t>(position_),
                                          static_cast<std::uint32_t>(position_ >> 32),
                                          static_cast<std::uint32_t>(stream_),
                                          static_cast<std::uint32_t>(stream_ >> 32) };
  const auto out = block(ctr, key_);
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  available_ = 2;
  ++position_;
}

Philox::result_type
Philox::operator()()
{
  if (available_ == 0)
    refill();
  return buffer_[2 - available_--];
}

double
uniform_open01(Philox& rng)
{
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t
derive_stream(std::uint64_t rep, std::uint64_t purpose)
{
  return splitmix64(splitmix64(rep) ^ (purpose * 0xD6E8FEB86659FD93ull));
}

std::uint64_t
derive_seed(std::uint64_t master, std::uint64_t rep)
{
  return splitmix64(master ^ splitmix64(rep + 0x632BE59BD9B4E019ull));
}

} // namespace retasa
