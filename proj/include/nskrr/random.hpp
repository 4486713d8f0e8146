#pragma once

#include <cstdint>

namespace nskrr::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed of Monte Carlo replicate k under master seed `master`.
constexpr std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t k) noexcept {
  return master ^ (k * kGolden);
}

// Independent stream key for a named purpose (sampling, noise, ...).
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) noexcept {
  return mix64(seed ^ mix64(tag + kGolden));
}

// Counter-based draws: the value depends only on (seed, counter, lane), so a
// sampler state can be a plain value with no engine inside.
double uniform(std::uint64_t seed, std::uint64_t counter, std::uint32_t lane) noexcept;

// Box-Muller on lanes (2*pair, 2*pair+1).
double standard_normal(std::uint64_t seed, std::uint64_t counter, std::uint32_t pair) noexcept;

// Sequential lanes of one counter.
class UniformStream {
 public:
  UniformStream(std::uint64_t seed, std::uint64_t counter) noexcept : seed_(seed), counter_(counter) {}
  double next() noexcept { return uniform(seed_, counter_, lane_++); }
  double next_normal() noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
  std::uint32_t lane_ = 0;
};

}  // namespace nskrr::rng
