#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "palp/common.hpp"

namespace palp {

/// Uniform isotropic node-centered grid in 2 or 3 dimensions. The last axis
/// varies fastest in memory. 2D grids exist to keep small numerical tests
/// cheap; the pipeline itself is 3D.
class GridGeometry {
 public:
  GridGeometry(int rank, std::array<int, 3> dims, Vec3 origin, double spacing)
      : rank_(rank), dims_(dims), origin_(origin), spacing_(spacing) {
    if (rank != 2 && rank != 3) throw std::invalid_argument("GridGeometry: rank must be 2 or 3");
    for (int a = 0; a < rank_; ++a) {
      if (dims_[a] < 4)
        throw std::invalid_argument("GridGeometry: need at least 4 nodes per axis, axis " +
                                    std::to_string(a) + " has " + std::to_string(dims_[a]));
    }
    for (int a = rank_; a < 3; ++a) dims_[a] = 1;
    if (!(spacing > 0.0) || !std::isfinite(spacing))
      throw std::invalid_argument("GridGeometry: spacing must be positive and finite");
    if (!finite(origin)) throw std::invalid_argument("GridGeometry: origin must be finite");
  }

  /// 3D cube of n^3 nodes spanning [center - side/2, center + side/2].
  [[nodiscard]] static GridGeometry centered_cube(int n, const Vec3& center, double side) {
    if (side <= 0.0) throw std::invalid_argument("centered_cube: side must be positive");
    const double h = side / (n - 1);
    const Vec3 origin = center - 0.5 * Vec3{side, side, side};
    return GridGeometry(3, {n, n, n}, origin, h);
  }

  [[nodiscard]] int rank() const { return rank_; }
  [[nodiscard]] int dim(int axis) const { return dims_[axis]; }
  [[nodiscard]] const std::array<int, 3>& dims() const { return dims_; }
  [[nodiscard]] const Vec3& origin() const { return origin_; }
  [[nodiscard]] double spacing() const { return spacing_; }

  [[nodiscard]] std::size_t node_count() const {
    return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  }

  [[nodiscard]] std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k;
  }

  /// Flat-index stride of one step along an axis.
  [[nodiscard]] std::size_t stride(int axis) const {
    switch (axis) {
      case 0: return static_cast<std::size_t>(dims_[1]) * dims_[2];
      case 1: return dims_[2];
      default: return 1;
    }
  }

  [[nodiscard]] Vec3 position(int i, int j, int k) const {
    return origin_ + spacing_ * Vec3{static_cast<double>(i), static_cast<double>(j),
                                     static_cast<double>(k)};
  }

  [[nodiscard]] Vec3 min_corner() const { return origin_; }
  [[nodiscard]] Vec3 max_corner() const {
    return position(dims_[0] - 1, dims_[1] - 1, dims_[2] - 1);
  }

  [[nodiscard]] bool is_boundary(int i, int j, int k) const {
    const int idx[3] = {i, j, k};
    for (int a = 0; a < rank_; ++a)
      if (idx[a] == 0 || idx[a] == dims_[a] - 1) return true;
    return false;
  }

  [[nodiscard]] bool operator==(const GridGeometry& o) const {
    return rank_ == o.rank_ && dims_ == o.dims_ && origin_.x == o.origin_.x &&
           origin_.y == o.origin_.y && origin_.z == o.origin_.z && spacing_ == o.spacing_;
  }

 private:
  int rank_;
  std::array<int, 3> dims_;
  Vec3 origin_;
  double spacing_;
};

struct ScalarGrid {
  explicit ScalarGrid(const GridGeometry& g) : geom(g), values(g.node_count(), 0.0) {}

  ScalarGrid(const GridGeometry& g, std::vector<double> v) : geom(g), values(std::move(v)) {
    if (values.size() != geom.node_count())
      throw std::invalid_argument("ScalarGrid: value count does not match geometry");
    for (double x : values)
      if (!std::isfinite(x)) throw std::invalid_argument("ScalarGrid: non-finite value");
  }

  [[nodiscard]] double& at(int i, int j, int k) { return values[geom.index(i, j, k)]; }
  [[nodiscard]] double at(int i, int j, int k) const { return values[geom.index(i, j, k)]; }

  GridGeometry geom;
  std::vector<double> values;
};

struct VectorGrid {
  explicit VectorGrid(const GridGeometry& g)
      : geom(g), comp{std::vector<double>(g.node_count(), 0.0),
                      std::vector<double>(g.node_count(), 0.0),
                      std::vector<double>(g.node_count(), 0.0)} {}

  GridGeometry geom;
  std::array<std::vector<double>, 3> comp;
};

/// Evaluates fn(position) at every node.
template <class F>
[[nodiscard]] ScalarGrid sample_scalar(const GridGeometry& g, F&& fn) {
  ScalarGrid out(g);
  std::size_t id = 0;
  for (int i = 0; i < g.dim(0); ++i)
    for (int j = 0; j < g.dim(1); ++j)
      for (int k = 0; k < g.dim(2); ++k, ++id) out.values[id] = fn(g.position(i, j, k));
  return out;
}

namespace detail {

/// One-sided difference pair along an axis; at grid faces the missing side
/// is copied from the available one.
struct SlopePair {
  double backward;
  double forward;
};

inline SlopePair one_sided_slopes(const std::vector<double>& v, std::size_t id, int idx, int n,
                                  std::size_t stride, double h) {
  SlopePair s{0.0, 0.0};
  const bool has_b = idx > 0;
  const bool has_f = idx < n - 1;
  if (has_b) s.backward = (v[id] - v[id - stride]) / h;
  if (has_f) s.forward = (v[id + stride] - v[id]) / h;
  if (!has_b) s.backward = s.forward;
  if (!has_f) s.forward = s.backward;
  return s;
}

/// Squared upwind slope contribution of one axis in the Godunov scheme.
inline double godunov_axis_sq(const SlopePair& s, double sign_value) {
  if (sign_value >= 0.0) {
    const double a = std::max(s.backward, 0.0);
    const double b = std::min(s.forward, 0.0);
    return std::max(a * a, b * b);
  }
  const double a = std::min(s.backward, 0.0);
  const double b = std::max(s.forward, 0.0);
  return std::max(a * a, b * b);
}

/// Mirror reflection of an out-of-range node index across the grid faces.
inline int reflect(int idx, int n) {
  if (idx < 0) return -idx;
  if (idx > n - 1) return 2 * (n - 1) - idx;
  return idx;
}

template <class F>
void for_each_node(const GridGeometry& g, F&& fn) {
  std::size_t id = 0;
  for (int i = 0; i < g.dim(0); ++i)
    for (int j = 0; j < g.dim(1); ++j)
      for (int k = 0; k < g.dim(2); ++k, ++id) fn(i, j, k, id);
}

}  // namespace detail

/// Central-difference gradient, second order at interior nodes and
/// first-order one-sided on grid faces.
[[nodiscard]] inline VectorGrid gradient_central(const ScalarGrid& f) {
  const GridGeometry& g = f.geom;
  VectorGrid out(g);
  const double h = g.spacing();
  detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
    const int idx[3] = {i, j, k};
    for (int a = 0; a < g.rank(); ++a) {
      const std::size_t st = g.stride(a);
      const int n = g.dim(a);
      double d;
      if (idx[a] == 0)
        d = (f.values[id + st] - f.values[id]) / h;
      else if (idx[a] == n - 1)
        d = (f.values[id] - f.values[id - st]) / h;
      else
        d = (f.values[id + st] - f.values[id - st]) / (2.0 * h);
      out.comp[a][id] = d;
    }
  });
  return out;
}

/// Godunov upwind gradient magnitude. The upwind side per axis is selected by
/// the sign of sign_ref at the node, as in level-set reinitialization.
[[nodiscard]] inline ScalarGrid gradient_norm_godunov(const ScalarGrid& f,
                                                      const ScalarGrid& sign_ref) {
  if (!(f.geom == sign_ref.geom))
    throw std::invalid_argument("gradient_norm_godunov: mismatched geometries");
  const GridGeometry& g = f.geom;
  ScalarGrid out(g);
  const double h = g.spacing();
  detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
    const int idx[3] = {i, j, k};
    double sum = 0.0;
    for (int a = 0; a < g.rank(); ++a) {
      const auto s = detail::one_sided_slopes(f.values, id, idx[a], g.dim(a), g.stride(a), h);
      sum += detail::godunov_axis_sq(s, sign_ref.values[id]);
    }
    out.values[id] = std::sqrt(sum);
  });
  return out;
}

/// Central-difference divergence of a vector field, one-sided on grid faces.
[[nodiscard]] inline ScalarGrid divergence(const VectorGrid& q) {
  const GridGeometry& g = q.geom;
  ScalarGrid out(g);
  const double h = g.spacing();
  detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
    const int idx[3] = {i, j, k};
    double sum = 0.0;
    for (int a = 0; a < g.rank(); ++a) {
      const std::size_t st = g.stride(a);
      const int n = g.dim(a);
      const std::vector<double>& v = q.comp[a];
      if (idx[a] == 0)
        sum += (v[id + st] - v[id]) / h;
      else if (idx[a] == n - 1)
        sum += (v[id] - v[id - st]) / h;
      else
        sum += (v[id + st] - v[id - st]) / (2.0 * h);
    }
    out.values[id] = sum;
  });
  return out;
}

/// Laplacian built as divergence(gradient_central(f)) collapsed into one
/// stencil, so the composition identity holds to rounding at nodes at least
/// two layers inside. Out-of-range samples are mirror-padded.
[[nodiscard]] inline ScalarGrid laplacian(const ScalarGrid& f) {
  const GridGeometry& g = f.geom;
  ScalarGrid out(g);
  const double h = g.spacing();
  detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
    const int idx[3] = {i, j, k};
    double sum = 0.0;
    for (int a = 0; a < g.rank(); ++a) {
      const std::size_t st = g.stride(a);
      const int n = g.dim(a);
      const auto sample = [&](int off) {
        const int r = detail::reflect(idx[a] + off, n);
        return f.values[id + st * r - st * static_cast<std::size_t>(idx[a])];
      };
      const double gp = (sample(2) - sample(0)) / (2.0 * h);
      const double gm = (sample(0) - sample(-2)) / (2.0 * h);
      sum += (gp - gm) / (2.0 * h);
    }
    out.values[id] = sum;
  });
  return out;
}

/// Multilinear interpolation (bilinear in 2D, trilinear in 3D).
[[nodiscard]] inline double sample_trilinear(const ScalarGrid& f, const Vec3& x) {
  const GridGeometry& g = f.geom;
  const double h = g.spacing();
  const double pos[3] = {x.x, x.y, x.z};
  const double org[3] = {g.origin().x, g.origin().y, g.origin().z};
  int base[3] = {0, 0, 0};
  double frac[3] = {0.0, 0.0, 0.0};
  for (int a = 0; a < g.rank(); ++a) {
    const double t = (pos[a] - org[a]) / h;
    const double tol = 1e-9;
    if (t < -tol || t > g.dim(a) - 1 + tol)
      throw std::invalid_argument("sample_trilinear: point outside the grid bounding box");
    const double tc = std::clamp(t, 0.0, static_cast<double>(g.dim(a) - 1));
    base[a] = std::min(static_cast<int>(tc), g.dim(a) - 2);
    frac[a] = tc - base[a];
  }
  const int corners = 1 << g.rank();
  double acc = 0.0;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    int node[3] = {base[0], base[1], base[2]};
    for (int a = 0; a < g.rank(); ++a) {
      const int bit = (c >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      node[a] += bit;
    }
    acc += w * f.at(node[0], node[1], node[2]);
  }
  return acc;
}

/// Marks nodes near slope discontinuities of a level-set field: somewhere
/// along an axis the one-sided slopes point in conflicting directions with
/// near-unit magnitude (the medial-axis signature), then dilates the marks by
/// `dilation_cells` in the Chebyshev metric. Reinitialization cannot drive the
/// eikonal residual to zero on this set, so residual measurements exclude it.
[[nodiscard]] inline std::vector<std::uint8_t> skeleton_band(const ScalarGrid& f,
                                                             int dilation_cells = 2,
                                                             double slope_threshold = 0.5) {
  const GridGeometry& g = f.geom;
  const double h = g.spacing();
  std::vector<std::uint8_t> mask(g.node_count(), 0);
  detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
    const int idx[3] = {i, j, k};
    for (int a = 0; a < g.rank(); ++a) {
      const auto s = detail::one_sided_slopes(f.values, id, idx[a], g.dim(a), g.stride(a), h);
      if (s.backward * s.forward < 0.0 &&
          std::min(std::fabs(s.backward), std::fabs(s.forward)) > slope_threshold) {
        mask[id] = 1;
        break;
      }
    }
  });
  // Separable Chebyshev dilation, one axis at a time.
  std::vector<std::uint8_t> tmp(mask.size());
  for (int a = 0; a < g.rank(); ++a) {
    const std::size_t st = g.stride(a);
    const int n = g.dim(a);
    detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
      const int idx[3] = {i, j, k};
      std::uint8_t hit = 0;
      const int lo = std::max(idx[a] - dilation_cells, 0);
      const int hi = std::min(idx[a] + dilation_cells, n - 1);
      const std::size_t row = id - st * static_cast<std::size_t>(idx[a]);
      for (int t = lo; t <= hi && !hit; ++t) hit = mask[row + st * static_cast<std::size_t>(t)];
      tmp[id] = hit;
    });
    std::swap(mask, tmp);
  }
  return mask;
}

}  // namespace palp
