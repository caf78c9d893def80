#pragma once

#include <cstdint>
#include <random>

namespace contagion {

/// Engine used for every stochastic component.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to decorrelate derived seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream purposes inside one replication.
enum class Stream : std::uint64_t {
  kGraph = 1,
  kAugment = 2,
  kBalance = 3,
};

/// Seed for stream `purpose` of replication `replication` under `master`.
///
/// seed = splitmix64(splitmix64(master ^ splitmix64(replication)) + purpose)
///
/// Depends only on (master, replication, purpose), never on scheduling, so
/// any worker count reproduces the same draws.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t replication,
                                    Stream purpose) noexcept {
  const std::uint64_t rep = splitmix64(master ^ splitmix64(replication));
  return splitmix64(rep + static_cast<std::uint64_t>(purpose));
}

}  // namespace contagion
