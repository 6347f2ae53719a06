#ifndef HSLAB_RNG_HPP
#define HSLAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace hslab {

// Counter-based splittable generator. Every logical task derives its own
// stream from (key, task_index), so results are reproducible regardless of
// evaluation order or thread scheduling.
struct RngStream {
  std::uint64_t key = 0;
  std::uint64_t counter = 0;

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  static RngStream from_seed(std::uint64_t seed) {
    RngStream s;
    s.key = mix64(seed + kGolden);
    s.counter = 0;
    return s;
  }

  // Child stream for sub-task `index`; independent of this stream's counter.
  RngStream derive(std::uint64_t index) const {
    RngStream s;
    s.key = mix64(key ^ (0xD1B54A32D192ED03ull + index * 0x8CB92BA72F3D8DD7ull));
    s.counter = 0;
    return s;
  }

  std::uint64_t next_u64() { return mix64(key + (++counter) * kGolden); }

  // Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (one value per call, two uniforms consumed).
  double next_gaussian() {
    double u1 = 1.0 - next_unit();  // (0, 1]
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be positive");
    std::uint64_t rem = UINT64_MAX % n;
    std::uint64_t lim = UINT64_MAX - ((rem + 1) % n);
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r > lim);
    return r % n;
  }

  int next_sign() { return (next_u64() & 1ull) ? +1 : -1; }
};

}  // namespace hslab

#endif  // HSLAB_RNG_HPP
