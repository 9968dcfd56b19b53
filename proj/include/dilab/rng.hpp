#pragma once

#include <cstdint>

// Counter-based RNG: every variate is a pure function of (key, indices), so
// estimates are invariant to execution order and thread count. Uniforms keep
// the top 52 bits; the vectorised path reproduces them bit-for-bit via the
// exponent trick (1.0 | mantissa) - 1.0.
namespace dilab::rng {

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t idx) {
  return mix(key + (idx + 1) * kGamma);
}
constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t a,
                               std::uint64_t b) {
  return derive(derive(key, a), b);
}
constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t a,
                               std::uint64_t b, std::uint64_t c) {
  return derive(derive(key, a, b), c);
}

constexpr double u01(std::uint64_t h) {
  return static_cast<double>(h >> 12) * 0x1.0p-52;
}

// Unbiased-enough integer draw in [0, m) (Lemire multiply-shift).
constexpr std::uint32_t below(std::uint64_t h, std::uint32_t m) {
  return static_cast<std::uint32_t>(
      (static_cast<unsigned __int128>(h) * m) >> 64);
}

}  // namespace dilab::rng
