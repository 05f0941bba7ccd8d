#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace lns {

/// Counter-based random number generator with named sub-streams.
///
/// The generator is a SplitMix64-style bijective mixer driven by an explicit
/// counter, so a draw depends only on (seed, stream, counter). This makes the
/// stream bit-identical across platforms and lets independent consumers
/// (dataset generation, weight init, per-step noise) derive their own streams
/// from one master seed without coordinating.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(mix(mix(seed + kGolden) ^ mix(stream * kGolden + 1))),
        counter_(0) {}

  /// Derive an independent stream from this generator's seed material.
  [[nodiscard]] Rng stream(std::uint64_t id) const {
    return Rng(base_, id + 1);
  }

  [[nodiscard]] Rng stream(std::string_view name) const {
    return stream(fnv1a(name));
  }

  [[nodiscard]] Rng stream(std::string_view name, std::uint64_t id) const {
    return stream(fnv1a(name) ^ mix(id));
  }

  std::uint64_t next_u64() { return mix(base_ + (++counter_) * kGolden); }

  /// Uniform in [0, 1), 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // 64-bit multiply-shift; bias is < 2^-64 * n, irrelevant at our scales.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// One N(mean, std^2) draw via Box-Muller. Consumes two uniforms.
  double normal(double mean = 0.0, double std = 1.0) {
    if (std < 0.0) throw std::invalid_argument("Rng::normal: std < 0");
    // next_double() is in [0,1); flip to (0,1] so log() is finite.
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + std * r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  std::uint64_t counter() const { return counter_; }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ULL;
    }
    return h;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t base_;
  std::uint64_t counter_;
};

}  // namespace lns
