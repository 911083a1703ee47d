#pragma once

#include <algorithm>
#include <string>

#include "palp/common.hpp"

namespace palp {

/// Analytic test bodies with exact signed distance, outward normals and mean
/// curvature. Spheres carry the experiments; the plane and ellipsoid exist
/// for stress tests.
class ShapeSpec {
 public:
  enum class Kind { sphere, plane, ellipsoid };

  [[nodiscard]] static ShapeSpec sphere(const Vec3& center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("sphere: radius must be positive");
    ShapeSpec s;
    s.kind_ = Kind::sphere;
    s.center_ = center;
    s.radius_ = radius;
    return s;
  }

  /// Half space below the plane through `point` with outward normal `normal`;
  /// sampling draws from the square patch of the given half width around
  /// `point`.
  [[nodiscard]] static ShapeSpec plane(const Vec3& point, const Vec3& normal,
                                       double patch_halfwidth = 0.1) {
    if (!(patch_halfwidth > 0.0))
      throw std::invalid_argument("plane: patch half width must be positive");
    ShapeSpec s;
    s.kind_ = Kind::plane;
    s.center_ = point;
    s.normal_ = normalized(normal);
    s.patch_halfwidth_ = patch_halfwidth;
    return s;
  }

  [[nodiscard]] static ShapeSpec ellipsoid(const Vec3& center, const Vec3& semi_axes) {
    if (!(semi_axes.x > 0.0 && semi_axes.y > 0.0 && semi_axes.z > 0.0))
      throw std::invalid_argument("ellipsoid: semi-axes must be positive");
    ShapeSpec s;
    s.kind_ = Kind::ellipsoid;
    s.center_ = center;
    s.axes_ = semi_axes;
    return s;
  }

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] const Vec3& center() const { return center_; }
  [[nodiscard]] double radius() const { return radius_; }
  [[nodiscard]] const Vec3& plane_normal() const { return normal_; }
  [[nodiscard]] double patch_halfwidth() const { return patch_halfwidth_; }
  [[nodiscard]] const Vec3& semi_axes() const { return axes_; }

  /// Signed distance, negative inside. Exact for all three kinds; the
  /// ellipsoid solves the closest-point condition numerically. For interior
  /// ellipsoid points with a coordinate exactly on a symmetry plane the
  /// medial-axis branch is not chased, which only affects points far from
  /// the surface.
  [[nodiscard]] double sdf(const Vec3& x) const {
    switch (kind_) {
      case Kind::sphere: return norm(x - center_) - radius_;
      case Kind::plane: return dot(x - center_, normal_);
      case Kind::ellipsoid: return ellipsoid_sdf(x);
    }
    return 0.0;
  }

  /// Outward unit normal at (or near) a surface point.
  [[nodiscard]] Vec3 outward_normal(const Vec3& x) const {
    switch (kind_) {
      case Kind::sphere: return normalized(x - center_);
      case Kind::plane: return normal_;
      case Kind::ellipsoid: {
        const Vec3 r = x - center_;
        return normalized({r.x / (axes_.x * axes_.x), r.y / (axes_.y * axes_.y),
                           r.z / (axes_.z * axes_.z)});
      }
    }
    return {};
  }

  /// Mean curvature at a surface point, positive for convex bodies.
  [[nodiscard]] double mean_curvature(const Vec3& x) const {
    switch (kind_) {
      case Kind::sphere: return 1.0 / radius_;
      case Kind::plane: return 0.0;
      case Kind::ellipsoid: {
        // For F(x) = sum x_i^2/a_i^2 - 1:
        // 2H = (|grad F|^2 tr(Hess) - grad F . Hess . grad F) / |grad F|^3.
        const Vec3 r = x - center_;
        const double a2 = axes_.x * axes_.x, b2 = axes_.y * axes_.y, c2 = axes_.z * axes_.z;
        const Vec3 grad = {2.0 * r.x / a2, 2.0 * r.y / b2, 2.0 * r.z / c2};
        const double g2 = norm_squared(grad);
        const double trace = 2.0 / a2 + 2.0 / b2 + 2.0 / c2;
        const double ghg =
            4.0 * (r.x * r.x / (a2 * a2 * a2) + r.y * r.y / (b2 * b2 * b2) +
                   r.z * r.z / (c2 * c2 * c2)) * 2.0;
        return (g2 * trace - ghg) / (2.0 * g2 * std::sqrt(g2));
      }
    }
    return 0.0;
  }

  [[nodiscard]] std::string kind_name() const {
    switch (kind_) {
      case Kind::sphere: return "sphere";
      case Kind::plane: return "plane";
      case Kind::ellipsoid: return "ellipsoid";
    }
    return "";
  }

 private:
  [[nodiscard]] double ellipsoid_sdf(const Vec3& x) const {
    const Vec3 p = x - center_;
    const double a[3] = {axes_.x, axes_.y, axes_.z};
    const double q[3] = {p.x, p.y, p.z};
    const double level =
        q[0] * q[0] / (a[0] * a[0]) + q[1] * q[1] / (a[1] * a[1]) + q[2] * q[2] / (a[2] * a[2]);
    const double amin = std::min({a[0], a[1], a[2]});
    double pole = -amin * amin;
    bool all_zero = true;
    for (int i = 0; i < 3; ++i) {
      if (q[i] != 0.0) all_zero = false;
    }
    if (all_zero) return -amin;
    // Closest point y_i = a_i^2 q_i / (t + a_i^2); solve f(t) = sum
    // (a_i q_i / (t + a_i^2))^2 = 1 on (pole, inf), f decreasing.
    double scale = std::max({a[0], a[1], a[2], norm(p)});
    const auto f = [&](double t) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) {
        if (q[i] == 0.0) continue;
        const double d = a[i] * q[i] / (t + a[i] * a[i]);
        s += d * d;
      }
      return s;
    };
    // Only poles of axes with q_i != 0 matter.
    pole = -1e300;
    for (int i = 0; i < 3; ++i)
      if (q[i] != 0.0) pole = std::max(pole, -a[i] * a[i]);
    double lo = pole + 1e-14 * scale * scale;
    while (f(lo) <= 1.0 && lo - pole > 1e-300) lo = pole + 0.5 * (lo - pole);
    double hi = std::max(lo, 0.0) + scale * scale;
    while (f(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f(mid) > 1.0)
        lo = mid;
      else
        hi = mid;
    }
    const double t = 0.5 * (lo + hi);
    Vec3 y;
    const double* qq = q;
    y.x = a[0] * a[0] * qq[0] / (t + a[0] * a[0]);
    y.y = a[1] * a[1] * qq[1] / (t + a[1] * a[1]);
    y.z = a[2] * a[2] * qq[2] / (t + a[2] * a[2]);
    const double dist = norm(p - y);
    return level >= 1.0 ? dist : -dist;
  }

  Kind kind_ = Kind::sphere;
  Vec3 center_;
  double radius_ = 1.0;
  Vec3 normal_ = {0.0, 0.0, 1.0};
  double patch_halfwidth_ = 0.1;
  Vec3 axes_ = {1.0, 1.0, 1.0};
};

}  // namespace palp
