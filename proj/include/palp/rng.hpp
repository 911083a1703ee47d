#pragma once

#include <cstdint>
#include <random>

#include "palp/common.hpp"

namespace palp {

/// splitmix64 mixing step (Vigna), used to derive independent stream seeds.
[[nodiscard]] inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic random stream: mt19937_64 (bit-reproducible across
/// platforms per the C++ standard) with Box-Muller gaussians, so no
/// implementation-defined distributions are involved.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Stream for one sample site, decorrelated from the campaign seed by
  /// splitmix64(seed + (site_index + 1) * golden-gamma).
  [[nodiscard]] static RandomStream for_site(std::uint64_t campaign_seed,
                                             std::uint64_t site_index) {
    return RandomStream(splitmix64(campaign_seed + (site_index + 1) * 0x9E3779B97F4A7C15ULL));
  }

  /// Uniform in [0, 1), 53-bit resolution.
  [[nodiscard]] double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  [[nodiscard]] double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal via Box-Muller; the paired draw is cached.
  [[nodiscard]] double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  [[nodiscard]] Vec3 gaussian_vec3(double sigma) {
    return {sigma * gaussian(), sigma * gaussian(), sigma * gaussian()};
  }

  /// Uniform direction on the unit sphere.
  [[nodiscard]] Vec3 unit_vector() {
    for (;;) {
      const Vec3 v = gaussian_vec3(1.0);
      const double n = norm(v);
      if (n > 1e-12) return v / n;
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace palp
