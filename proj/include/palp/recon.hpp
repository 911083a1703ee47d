#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "palp/grid.hpp"

namespace palp {

/// Surface pose: contact point plus the inward unit normal as probes report
/// it. Reconstruction internally works with the outward normal -q so that the
/// recovered field increases outward (negative inside).
struct Pose {
  Vec3 position;
  Vec3 normal_inward;
};

/// Validated pose collection: finite entries, unit normals (renormalized,
/// rejected beyond 1e-3 deviation), pairwise-distinct positions (1e-9 m).
class PoseSet {
 public:
  explicit PoseSet(std::vector<Pose> poses) : poses_(std::move(poses)) {
    if (poses_.empty()) throw std::invalid_argument("PoseSet: empty");
    for (auto& p : poses_) {
      if (!finite(p.position) || !finite(p.normal_inward))
        throw std::invalid_argument("PoseSet: non-finite pose");
      const double n = norm(p.normal_inward);
      if (std::fabs(n - 1.0) > 1e-3)
        throw std::invalid_argument("PoseSet: normal deviates from unit length by more than 1e-3");
      p.normal_inward = p.normal_inward / n;
    }
    for (std::size_t i = 0; i < poses_.size(); ++i)
      for (std::size_t j = i + 1; j < poses_.size(); ++j)
        if (norm(poses_[i].position - poses_[j].position) < 1e-9)
          throw std::invalid_argument("PoseSet: positions closer than 1e-9 m (poses " +
                                      std::to_string(i) + ", " + std::to_string(j) + ")");
  }

  [[nodiscard]] std::size_t size() const { return poses_.size(); }
  [[nodiscard]] const Pose& operator[](std::size_t i) const { return poses_[i]; }
  [[nodiscard]] const std::vector<Pose>& poses() const { return poses_; }

 private:
  std::vector<Pose> poses_;
};

struct DirichletConstraint {
  Vec3 point;
  double value_m = 0.0;
};

struct PoissonConfig {
  /// Relative residual target of the conjugate-gradient solve.
  double tolerance = 1e-8;
  int max_iterations = 10000;
  /// Quadratic point-constraint penalty (dimensionless; applied as
  /// weight / h^2 so constraint dominance is grid independent).
  double constraint_weight = 1e4;
  /// Shepard (inverse-distance) weight exponent for normal interpolation.
  double idw_power = 2.0;
  /// Outer boundary treatment: rows pinned to the circumscribing-sphere
  /// guess (default), or the natural boundary of the alignment energy.
  enum class Boundary { dirichlet_guess, natural };
  Boundary boundary = Boundary::dirichlet_guess;
};

struct PoissonStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// SDF of the sphere circumscribing the point cloud (center: centroid of the
/// distinct points; radius: half the maximum pairwise distance), sampled on
/// the grid. Serves as the initial iterate and the far-field anchor.
[[nodiscard]] inline ScalarGrid initial_sphere_guess(const std::vector<Vec3>& points,
                                                     const GridGeometry& geometry) {
  if (points.size() < 2)
    throw std::invalid_argument("initial_sphere_guess: need at least 2 points");
  Vec3 center{0.0, 0.0, 0.0};
  for (const Vec3& p : points) {
    if (!finite(p)) throw std::invalid_argument("initial_sphere_guess: non-finite point");
    center = center + p;
  }
  center = center / static_cast<double>(points.size());
  double diam_sq = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      diam_sq = std::max(diam_sq, norm_squared(points[i] - points[j]));
  const double radius = 0.5 * std::sqrt(diam_sq);
  if (!(radius > 1e-12))
    throw std::invalid_argument("initial_sphere_guess: all points coincide");
  return sample_scalar(geometry, [&](const Vec3& x) { return norm(x - center) - radius; });
}

/// Shepard interpolation of the outward normals -q_i onto the grid. Within
/// h/10 of a pose the field snaps to that pose's normal exactly; where the
/// weighted sum degenerates it falls back to the nearest pose's normal.
/// Output vectors are unit length.
[[nodiscard]] inline VectorGrid interpolate_normal_field(const PoseSet& poses,
                                                         const GridGeometry& geometry,
                                                         const PoissonConfig& config = {}) {
  const std::size_t n = poses.size();
  const double h = geometry.spacing();
  const double snap_sq = (h / 10.0) * (h / 10.0);
  const bool power_two = config.idw_power == 2.0;
  const double half_power = config.idw_power / 2.0;

  std::vector<double> px(n), py(n), pz(n), nx(n), ny(n), nz(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Pose& p = poses[i];
    px[i] = p.position.x;
    py[i] = p.position.y;
    pz[i] = p.position.z;
    nx[i] = -p.normal_inward.x;
    ny[i] = -p.normal_inward.y;
    nz[i] = -p.normal_inward.z;
  }

  VectorGrid out(geometry);
  detail::for_each_node(geometry, [&](int i, int j, int k, std::size_t id) {
    const Vec3 x = geometry.position(i, j, k);
    double sx = 0.0, sy = 0.0, sz = 0.0, wsum = 0.0;
    double best_sq = 1e300;
    std::size_t best = 0;
    for (std::size_t p = 0; p < n; ++p) {
      const double dx = x.x - px[p], dy = x.y - py[p], dz = x.z - pz[p];
      const double d2 = dx * dx + dy * dy + dz * dz;
      if (d2 < best_sq) {
        best_sq = d2;
        best = p;
      }
      const double w = power_two ? 1.0 / d2 : std::pow(d2, -half_power);
      sx += w * nx[p];
      sy += w * ny[p];
      sz += w * nz[p];
      wsum += w;
    }
    double vx, vy, vz;
    if (best_sq < snap_sq) {
      vx = nx[best];
      vy = ny[best];
      vz = nz[best];
    } else {
      const double mag = std::sqrt(sx * sx + sy * sy + sz * sz);
      if (mag > 1e-12 * wsum) {
        vx = sx / mag;
        vy = sy / mag;
        vz = sz / mag;
      } else {
        vx = nx[best];
        vy = ny[best];
        vz = nz[best];
      }
    }
    out.comp[0][id] = vx;
    out.comp[1][id] = vy;
    out.comp[2][id] = vz;
  });
  return out;
}

namespace detail {

/// Matrix-free SPD system for the screened Poisson solve: compact 7-point
/// (5-point in 2D) Laplacian over the active nodes plus the constraint
/// penalties on the diagonal. In dirichlet_guess mode boundary nodes are
/// inactive (their values live in the right-hand side); in natural mode all
/// nodes are active and face nodes lose the missing-neighbor coupling (graph
/// Laplacian).
struct PoissonSystem {
  const GridGeometry& g;
  bool natural;
  std::vector<double> penalty;  // per node, already scaled by 1/h^2

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    for_each_node(g, [&](int i, int j, int k, std::size_t id) {
      const int idx[3] = {i, j, k};
      if (!natural && g.is_boundary(i, j, k)) {
        y[id] = 0.0;
        return;
      }
      double acc = 0.0;
      int degree = 0;
      for (int a = 0; a < g.rank(); ++a) {
        const std::size_t st = g.stride(a);
        if (idx[a] > 0) {
          ++degree;
          acc += x[id - st];
        }
        if (idx[a] < g.dim(a) - 1) {
          ++degree;
          acc += x[id + st];
        }
      }
      y[id] = (degree * x[id] - acc) * inv_h2 + penalty[id] * x[id];
    });
  }

  [[nodiscard]] std::vector<double> diagonal() const {
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    std::vector<double> d(g.node_count(), 1.0);
    for_each_node(g, [&](int i, int j, int k, std::size_t id) {
      const int idx[3] = {i, j, k};
      if (!natural && g.is_boundary(i, j, k)) return;
      int degree = 0;
      for (int a = 0; a < g.rank(); ++a) {
        if (idx[a] > 0) ++degree;
        if (idx[a] < g.dim(a) - 1) ++degree;
      }
      d[id] = degree * inv_h2 + penalty[id];
    });
    return d;
  }
};

}  // namespace detail

/// Solves laplacian(phi) = div(qhat) with point constraints applied as
/// quadratic penalties on each constraint's nearest node, by Jacobi
/// preconditioned conjugate gradients on the matrix-free system. The guess
/// supplies the initial iterate and, in dirichlet_guess mode, the fixed outer
/// boundary values; in natural mode the variational (Neumann) boundary of the
/// alignment energy is used and the constraints resolve the additive
/// constant.
[[nodiscard]] inline ScalarGrid solve_poisson(const VectorGrid& qhat,
                                              const std::vector<DirichletConstraint>& constraints,
                                              const ScalarGrid& guess,
                                              const PoissonConfig& config = {},
                                              PoissonStats* stats = nullptr) {
  const GridGeometry& g = guess.geom;
  if (!(qhat.geom == g)) throw std::invalid_argument("solve_poisson: mismatched geometries");
  if (constraints.empty())
    throw std::invalid_argument(
        "solve_poisson: at least one point constraint is required to fix the solution");
  if (!(config.tolerance > 0.0) || config.max_iterations < 1)
    throw std::invalid_argument("solve_poisson: bad solver configuration");
  if (!(config.constraint_weight > 0.0))
    throw std::invalid_argument("solve_poisson: constraint weight must be positive");

  const double h = g.spacing();
  const double inv_h2 = 1.0 / (h * h);
  const bool natural = config.boundary == PoissonConfig::Boundary::natural;
  const std::size_t n = g.node_count();

  detail::PoissonSystem sys{g, natural, std::vector<double>(n, 0.0)};
  std::vector<double> b(n, 0.0);

  // Penalties: weight/h^2 on the nearest node to each constraint point.
  for (const auto& c : constraints) {
    if (!finite(c.point) || !std::isfinite(c.value_m))
      throw std::invalid_argument("solve_poisson: non-finite constraint");
    const double pos[3] = {c.point.x, c.point.y, c.point.z};
    const double org[3] = {g.origin().x, g.origin().y, g.origin().z};
    int node[3] = {0, 0, 0};
    for (int a = 0; a < g.rank(); ++a) {
      const double t = (pos[a] - org[a]) / h;
      if (t < -1e-9 || t > g.dim(a) - 1 + 1e-9)
        throw std::invalid_argument("solve_poisson: constraint point outside the grid");
      node[a] = std::clamp(static_cast<int>(std::lround(t)), 0, g.dim(a) - 1);
    }
    if (!natural && g.is_boundary(node[0], node[1], node[2]))
      throw std::invalid_argument(
          "solve_poisson: constraint lands on the fixed outer boundary; enlarge the grid");
    const std::size_t id = g.index(node[0], node[1], node[2]);
    const double w = config.constraint_weight * inv_h2;
    sys.penalty[id] += w;
    b[id] += w * c.value_m;
  }

  // Field term of the right-hand side.
  if (natural) {
    // Edge-centered divergence from the alignment energy; missing face edges
    // simply drop out, which realizes the natural boundary condition.
    detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
      const int idx[3] = {i, j, k};
      double acc = 0.0;
      for (int a = 0; a < g.rank(); ++a) {
        const std::size_t st = g.stride(a);
        const std::vector<double>& q = qhat.comp[a];
        if (idx[a] > 0) acc += 0.5 * (q[id - st] + q[id]) / h;       // q at the lower edge
        if (idx[a] < g.dim(a) - 1) acc -= 0.5 * (q[id] + q[id + st]) / h;  // upper edge
      }
      b[id] += acc;
    });
  } else {
    const ScalarGrid div = divergence(qhat);
    detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
      if (g.is_boundary(i, j, k)) return;
      const int idx[3] = {i, j, k};
      double acc = -div.values[id];
      // Known boundary neighbors move to the right-hand side.
      for (int a = 0; a < g.rank(); ++a) {
        const std::size_t st = g.stride(a);
        if (idx[a] == 1) acc += guess.values[id - st] * inv_h2;
        if (idx[a] == g.dim(a) - 2) acc += guess.values[id + st] * inv_h2;
      }
      b[id] = acc + (sys.penalty[id] > 0.0 ? b[id] : 0.0);
    });
  }

  // Initial iterate: the guess, minus fixed boundary values in Dirichlet
  // mode (those are folded into b, so the CG vectors stay zero there).
  std::vector<double> x(n, 0.0);
  detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
    if (!natural && g.is_boundary(i, j, k)) return;
    x[id] = guess.values[id];
  });

  std::vector<double> r(n, 0.0), z(n, 0.0), p(n, 0.0), ap(n, 0.0);
  const std::vector<double> diag = sys.diagonal();
  sys.apply(x, ap);
  double b_norm_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = b[i] - ap[i];
    b_norm_sq += b[i] * b[i];
  }
  const double b_norm = std::sqrt(b_norm_sq);
  const double denom = b_norm > 0.0 ? b_norm : 1.0;

  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = r[i] / diag[i];
    p[i] = z[i];
    rz += r[i] * z[i];
  }

  int iterations = 0;
  double rel = 0.0;
  for (;; ++iterations) {
    double r_norm_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) r_norm_sq += r[i] * r[i];
    rel = std::sqrt(r_norm_sq) / denom;
    if (rel <= config.tolerance) break;
    if (iterations >= config.max_iterations)
      throw numerical_error("solve_poisson: no convergence in " +
                            std::to_string(config.max_iterations) +
                            " iterations (relative residual " + std::to_string(rel) + ")");
    sys.apply(p, ap);
    double p_ap = 0.0;
    for (std::size_t i = 0; i < n; ++i) p_ap += p[i] * ap[i];
    if (!(p_ap > 0.0))
      throw numerical_error("solve_poisson: system lost positive definiteness");
    const double alpha = rz / p_ap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    double rz_next = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = r[i] / diag[i];
      rz_next += r[i] * z[i];
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }

  if (stats != nullptr) {
    stats->iterations = iterations;
    stats->relative_residual = rel;
  }

  // Re-attach fixed boundary values.
  if (!natural) {
    detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
      if (g.is_boundary(i, j, k)) x[id] = guess.values[id];
    });
  }
  return ScalarGrid(g, std::move(x));
}

/// Pseudo-SDF reconstruction: circumscribing-sphere guess, Shepard normal
/// field, screened Poisson solve with phi(p_i) = values[i] (zero when no
/// values are given). The grid box must enclose the pose bounding box with at
/// least a 15% margin of the pose extent on every side.
[[nodiscard]] inline ScalarGrid reconstruct_pseudo_sdf(const PoseSet& poses,
                                                       const std::vector<double>& values,
                                                       const GridGeometry& geometry,
                                                       const PoissonConfig& config = {},
                                                       PoissonStats* stats = nullptr) {
  if (!values.empty() && values.size() != poses.size())
    throw std::invalid_argument("reconstruct_pseudo_sdf: values/poses size mismatch");
  if (poses.size() < static_cast<std::size_t>(geometry.rank()) + 1)
    throw std::invalid_argument("reconstruct_pseudo_sdf: need at least rank+1 poses");

  Vec3 lo = poses[0].position, hi = poses[0].position;
  for (std::size_t i = 1; i < poses.size(); ++i) {
    const Vec3& p = poses[i].position;
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const double lov[3] = {lo.x, lo.y, lo.z}, hiv[3] = {hi.x, hi.y, hi.z};
  const double gmin[3] = {geometry.min_corner().x, geometry.min_corner().y,
                          geometry.min_corner().z};
  const double gmax[3] = {geometry.max_corner().x, geometry.max_corner().y,
                          geometry.max_corner().z};
  for (int a = 0; a < geometry.rank(); ++a) {
    const double margin = 0.15 * (hiv[a] - lov[a]);
    if (gmin[a] > lov[a] - margin || gmax[a] < hiv[a] + margin)
      throw std::invalid_argument(
          "reconstruct_pseudo_sdf: grid box must enclose the poses with a 15% margin per side "
          "(axis " + std::to_string(a) + ")");
  }

  std::vector<Vec3> points;
  points.reserve(poses.size());
  for (const Pose& p : poses.poses()) points.push_back(p.position);
  const ScalarGrid guess = initial_sphere_guess(points, geometry);
  const VectorGrid qhat = interpolate_normal_field(poses, geometry, config);

  std::vector<DirichletConstraint> constraints(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i)
    constraints[i] = {poses[i].position, values.empty() ? 0.0 : values[i]};
  return solve_poisson(qhat, constraints, guess, config, stats);
}

}  // namespace palp
