#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "palp/grid.hpp"
#include "palp/pipeline.hpp"
#include "palp/shapes.hpp"
#include "palp/sim.hpp"

namespace palp {

/// Linear zero crossings of a nodal field: every exact-zero node once, plus
/// one interpolated point per grid edge whose endpoint values have strictly
/// opposite signs. Throws if the field never touches zero.
[[nodiscard]] inline std::vector<Vec3> extract_zero_crossings(const ScalarGrid& f) {
  const GridGeometry& g = f.geom;
  const double h = g.spacing();
  std::vector<Vec3> points;
  detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
    if (f.values[id] == 0.0) points.push_back(g.position(i, j, k));
  });
  detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
    const int idx[3] = {i, j, k};
    const double va = f.values[id];
    if (va == 0.0) return;
    for (int a = 0; a < g.rank(); ++a) {
      if (idx[a] >= g.dim(a) - 1) continue;
      const double vb = f.values[id + g.stride(a)];
      if (vb == 0.0 || (va < 0.0) == (vb < 0.0)) continue;
      const double t = va / (va - vb);
      Vec3 p = g.position(i, j, k);
      (a == 0 ? p.x : a == 1 ? p.y : p.z) += t * h;
      points.push_back(p);
    }
  });
  if (points.empty())
    throw std::invalid_argument("extract_zero_crossings: field does not cross zero");
  return points;
}

namespace detail {

/// Uniform-bin nearest-neighbor index over a fixed point set. Queries expand
/// Chebyshev shells of bins outward until the best squared distance rules
/// out every unvisited shell.
class PointIndex {
 public:
  explicit PointIndex(const std::vector<Vec3>& points) : pts_(points) {
    if (pts_.empty()) throw std::invalid_argument("PointIndex: empty point set");
    lo_ = hi_ = pts_[0];
    for (const Vec3& p : pts_) {
      lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y), std::min(lo_.z, p.z)};
      hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y), std::max(hi_.z, p.z)};
    }
    const double extent =
        std::max({hi_.x - lo_.x, hi_.y - lo_.y, hi_.z - lo_.z});
    if (pts_.size() < 32 || extent <= 0.0) {
      brute_ = true;
      return;
    }
    const int target = std::clamp(
        static_cast<int>(std::cbrt(static_cast<double>(pts_.size()) / 4.0)), 1, 64);
    cell_ = extent / target;
    for (int a = 0; a < 3; ++a) {
      const double e = (a == 0 ? hi_.x - lo_.x : a == 1 ? hi_.y - lo_.y : hi_.z - lo_.z);
      nb_[a] = std::max(1, static_cast<int>(e / cell_) + 1);
    }
    bins_.resize(static_cast<std::size_t>(nb_[0]) * nb_[1] * nb_[2]);
    for (std::size_t i = 0; i < pts_.size(); ++i) bins_[bin_of(pts_[i])].push_back(i);
  }

  [[nodiscard]] double nearest_sq(const Vec3& q) const {
    if (brute_) {
      double best = 1e300;
      for (const Vec3& p : pts_) best = std::min(best, norm_squared(q - p));
      return best;
    }
    int c[3];
    coords(q, c);
    double best = 1e300;
    const int max_shell = std::max({nb_[0], nb_[1], nb_[2]});
    for (int shell = 0; shell < max_shell; ++shell) {
      scan_shell(q, c, shell, best);
      const double bound = static_cast<double>(shell) * cell_;
      if (best <= bound * bound) break;
    }
    return best;
  }

 private:
  void coords(const Vec3& q, int c[3]) const {
    const double qa[3] = {q.x, q.y, q.z};
    const double la[3] = {lo_.x, lo_.y, lo_.z};
    for (int a = 0; a < 3; ++a)
      c[a] = std::clamp(static_cast<int>((qa[a] - la[a]) / cell_), 0, nb_[a] - 1);
  }

  [[nodiscard]] std::size_t bin_of(const Vec3& p) const {
    int c[3];
    coords(p, c);
    return (static_cast<std::size_t>(c[0]) * nb_[1] + c[1]) * nb_[2] + c[2];
  }

  void scan_shell(const Vec3& q, const int c[3], int shell, double& best) const {
    const int x0 = std::max(c[0] - shell, 0), x1 = std::min(c[0] + shell, nb_[0] - 1);
    const int y0 = std::max(c[1] - shell, 0), y1 = std::min(c[1] + shell, nb_[1] - 1);
    const int z0 = std::max(c[2] - shell, 0), z1 = std::min(c[2] + shell, nb_[2] - 1);
    for (int x = x0; x <= x1; ++x)
      for (int y = y0; y <= y1; ++y)
        for (int z = z0; z <= z1; ++z) {
          const int d = std::max({std::abs(x - c[0]), std::abs(y - c[1]), std::abs(z - c[2])});
          if (d != shell) continue;
          const auto& bin = bins_[(static_cast<std::size_t>(x) * nb_[1] + y) * nb_[2] + z];
          for (std::size_t i : bin) best = std::min(best, norm_squared(q - pts_[i]));
        }
  }

  std::vector<Vec3> pts_;
  Vec3 lo_{}, hi_{};
  bool brute_ = false;
  double cell_ = 1.0;
  int nb_[3] = {1, 1, 1};
  std::vector<std::vector<std::size_t>> bins_;
};

[[nodiscard]] inline double directed_hausdorff_sq(const std::vector<Vec3>& from,
                                                  const PointIndex& to) {
  double worst = 0.0;
  for (const Vec3& p : from) worst = std::max(worst, to.nearest_sq(p));
  return worst;
}

}  // namespace detail

/// Exact symmetric Hausdorff distance between two point sets.
[[nodiscard]] inline double hausdorff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff: empty point set");
  const detail::PointIndex ia(a), ib(b);
  return std::sqrt(
      std::max(detail::directed_hausdorff_sq(a, ib), detail::directed_hausdorff_sq(b, ia)));
}

struct EikonalStats {
  double max = 0.0;
  double mean = 0.0;
};

/// |grad norm - 1| statistics of a signed distance field over interior nodes
/// off the skeleton band (equidistant ridges are excluded by construction).
[[nodiscard]] inline EikonalStats eikonal_residual(const ScalarGrid& f) {
  const GridGeometry& g = f.geom;
  const ScalarGrid gn = gradient_norm_godunov(f, f);
  const std::vector<std::uint8_t> skel = skeleton_band(f);
  EikonalStats stats;
  double sum = 0.0;
  std::size_t count = 0;
  detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
    if (g.is_boundary(i, j, k) || skel[id]) return;
    const double r = std::fabs(gn.values[id] - 1.0);
    stats.max = std::max(stats.max, r);
    sum += r;
    ++count;
  });
  if (count == 0)
    throw std::invalid_argument("eikonal_residual: no measurable interior nodes");
  stats.mean = sum / static_cast<double>(count);
  return stats;
}

struct ConvergenceRow {
  int n_sites = 0;
  double hausdorff_m = 0.0;
  double eikonal_max = 0.0;
  double eikonal_mean = 0.0;
  double runtime_s = 0.0;
};

/// Noiseless probe-count refinement study: for each site count, simulate a
/// campaign (noise forced to zero so the error budget is purely sampling and
/// discretization), run the full inversion, and measure the Hausdorff
/// distance between the recovered zero set and the true surface sampled on
/// the same grid. Site draws are keyed to the site index, so each run is a
/// superset of the previous one.
[[nodiscard]] inline std::vector<ConvergenceRow> convergence_study(
    const CampaignConfig& base, const std::vector<int>& site_counts,
    const GridGeometry& geometry, const PipelineConfig& pipeline = {}) {
  if (site_counts.empty())
    throw std::invalid_argument("convergence_study: no site counts given");
  const ScalarGrid truth =
      sample_scalar(geometry, [&](const Vec3& x) { return base.shape.sdf(x); });
  const std::vector<Vec3> reference = extract_zero_crossings(truth);

  std::vector<ConvergenceRow> rows;
  for (int n : site_counts) {
    if (n < 1) throw std::invalid_argument("convergence_study: site count must be positive");
    CampaignConfig cfg = base;
    cfg.noise_sigma = 0.0;
    cfg.n_sites = n;
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<ProbeSite> sites = simulate_campaign(cfg);
    std::vector<std::vector<ProbeRecord>> records;
    records.reserve(sites.size());
    for (const ProbeSite& s : sites) records.push_back(s.records);
    const PipelineResult result = reconstruct_undeformed(records, geometry, pipeline);
    const double runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    ConvergenceRow row;
    row.n_sites = n;
    row.hausdorff_m = hausdorff(extract_zero_crossings(result.field), reference);
    const EikonalStats ek = eikonal_residual(result.field);
    row.eikonal_max = ek.max;
    row.eikonal_mean = ek.mean;
    row.runtime_s = runtime;
    rows.push_back(row);
  }
  return rows;
}

inline void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& out) {
  out << "N,d_N_m,eikonal_max,eikonal_mean,runtime_s\n";
  out << std::setprecision(17);
  for (const ConvergenceRow& r : rows)
    out << r.n_sites << ',' << r.hausdorff_m << ',' << r.eikonal_max << ',' << r.eikonal_mean
        << ',' << r.runtime_s << '\n';
}

inline void write_convergence_csv(const std::vector<ConvergenceRow>& rows,
                                  const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::invalid_argument("write_convergence_csv: cannot open " + path);
  write_convergence_csv(rows, static_cast<std::ostream&>(out));
  if (!out) throw std::invalid_argument("write_convergence_csv: write failed for " + path);
}

}  // namespace palp
