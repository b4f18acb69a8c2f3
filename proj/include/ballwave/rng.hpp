#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace ballwave {

// Counter-based splittable generator. Every output is a pure function of
// (master seed, stream index, counter), so per-sample streams can be drawn
// in any order, on any thread, with bitwise-identical results.
//
// Frozen contract, relied on by the reproducibility guarantee:
//   - core mixer: splitmix64 finalizer over key + counter * golden gamma
//   - uniforms:   top 53 bits mapped to [0,1) (or (0,1] for log arguments)
//   - normals:    Box-Muller pairs from one (0,1] x [0,1) uniform pair
class CounterRng {
 public:
  CounterRng(std::uint64_t master_seed, std::uint64_t stream)
      : key_(mix(master_seed + kGamma) ^ mix(stream * kGamma + kSqrt2Frac)) {}

  std::uint64_t next_u64() { return mix(key_ + ++counter_ * kGamma); }

  // Uniform on [0,1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1]; safe as a log() argument.
  double next_double_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Pair of independent standard normals.
  std::pair<double, double> next_normal_pair() {
    const double u1 = next_double_pos();
    const double u2 = next_double();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * 3.14159265358979323846 * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kSqrt2Frac = 0x6A09E667F3BCC909ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ballwave
