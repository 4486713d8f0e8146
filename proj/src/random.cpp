#include "nskrr/random.hpp"

#include <cmath>
#include <numbers>

namespace nskrr::rng {

double uniform(std::uint64_t seed, std::uint64_t counter, std::uint32_t lane) noexcept {
  const std::uint64_t key = mix64(seed + mix64(counter + kGolden));
  const std::uint64_t bits = mix64(key + (static_cast<std::uint64_t>(lane) + 1) * kGolden);
  // Open interval (0, 1).
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(std::uint64_t seed, std::uint64_t counter, std::uint32_t pair) noexcept {
  const double u1 = uniform(seed, counter, 2 * pair);
  const double u2 = uniform(seed, counter, 2 * pair + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double UniformStream::next_normal() noexcept {
  const double u1 = next();
  const double u2 = next();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace nskrr::rng
