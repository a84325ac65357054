#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace hrtsim {

/// SplitMix64 finalizer: a bijective 64-bit avalanche mix.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for stream `index` under `base`. Distinct indices give decorrelated streams.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix64(mix64(base) ^ mix64(index ^ 0xD1B54A32D192ED03ULL));
}

/// FNV-1a, used to fold experiment tags into seed derivation.
constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Per-run seed for (experiment tag, cell, replicate) under a base seed.
constexpr std::uint64_t experiment_seed(std::uint64_t base, std::string_view tag,
                                        std::uint64_t cell, std::uint64_t replicate) noexcept {
  return derive_seed(derive_seed(derive_seed(base, hash_tag(tag)), cell), replicate);
}

/// Portable random source. The engine is std::mt19937_64 (its output sequence is
/// fixed by the standard); all distributions are implemented here rather than via
/// <random> distributions, whose algorithms vary between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Box-Muller; always consumes exactly two uniforms.
  double normal(double mean, double sd);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::mt19937_64 engine_;
};

}  // namespace hrtsim
