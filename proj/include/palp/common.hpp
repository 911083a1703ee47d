#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace palp {

inline constexpr const char* kVersion = "0.1.0";

/// Thrown when an iterative solver fails to reach its tolerance or a
/// computation degenerates numerically. Validation problems (bad arguments,
/// malformed files) use std::invalid_argument instead; the CLI maps the two
/// families to distinct exit codes.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
inline Vec3 operator*(const Vec3& v, double s) { return s * v; }
inline Vec3 operator/(const Vec3& v, double s) { return {v.x / s, v.y / s, v.z / s}; }
inline Vec3 operator-(const Vec3& v) { return {-v.x, -v.y, -v.z}; }

[[nodiscard]] inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

[[nodiscard]] inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

[[nodiscard]] inline double norm_squared(const Vec3& v) { return dot(v, v); }
[[nodiscard]] inline double norm(const Vec3& v) { return std::sqrt(norm_squared(v)); }

[[nodiscard]] inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
  return v / n;
}

[[nodiscard]] inline bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

}  // namespace palp
