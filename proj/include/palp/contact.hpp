#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "palp/common.hpp"

// Flat-punch / Hertz contact relations for force-controlled palpation of a
// linear-elastic half space, plus the modulus and curvature estimators built
// on them. Forces in newtons, lengths in meters, moduli in pascals.

namespace palp {

struct MaterialParams {
  double youngs_pa = 0.0;
  double poisson = 0.0;
  std::optional<double> density_kg_m3;
};

/// One force-controlled probe: settled contact position, inward surface
/// normal at the contact, applied force, punch radius. `value_m` optionally
/// carries an externally supplied signed-distance target for the point.
struct ProbeRecord {
  Vec3 position;
  Vec3 normal;
  double force_n = 0.0;
  double punch_radius_m = 0.0;
  std::optional<double> value_m;
};

inline void validate_poisson_ratio(double nu) {
  if (!(nu > -1.0 && nu < 0.5))
    throw std::invalid_argument("poisson ratio must lie in (-1, 0.5), got " + std::to_string(nu));
}

/// Plane-strain (effective) modulus E* = E / (1 - nu^2).
[[nodiscard]] inline double plane_strain_modulus(double youngs_pa, double nu) {
  if (!(youngs_pa > 0.0)) throw std::invalid_argument("plane_strain_modulus: E must be positive");
  validate_poisson_ratio(nu);
  return youngs_pa / (1.0 - nu * nu);
}

/// Rigid flat circular punch on a half space: delta = F / (2 E* R).
[[nodiscard]] inline double flat_indentation(double force_n, double e_star_pa, double radius_m) {
  if (!(force_n >= 0.0)) throw std::invalid_argument("flat_indentation: force must be >= 0");
  if (!(e_star_pa > 0.0)) throw std::invalid_argument("flat_indentation: E* must be positive");
  if (!(radius_m > 0.0)) throw std::invalid_argument("flat_indentation: radius must be positive");
  return force_n / (2.0 * e_star_pa * radius_m);
}

/// Mean gap between a flat punch face and a uniformly curved surface patch:
/// delta_geom = kappa R^2 / 4.
[[nodiscard]] inline double geometric_indentation_constant(double kappa_per_m, double radius_m) {
  if (!(radius_m > 0.0))
    throw std::invalid_argument("geometric_indentation_constant: radius must be positive");
  if (!std::isfinite(kappa_per_m))
    throw std::invalid_argument("geometric_indentation_constant: kappa must be finite");
  return kappa_per_m * radius_m * radius_m / 4.0;
}

/// Mean gap for curvature varying over the punch disk:
/// (1 / (pi R^2)) * integral of kappa(rho, theta) rho^2 / 2 over the disk,
/// by midpoint quadrature in polar coordinates.
[[nodiscard]] inline double geometric_indentation_varying(
    const std::function<double(double, double)>& kappa, double radius_m, int n_rho = 64,
    int n_theta = 64) {
  if (!(radius_m > 0.0))
    throw std::invalid_argument("geometric_indentation_varying: radius must be positive");
  if (n_rho < 1 || n_theta < 1)
    throw std::invalid_argument("geometric_indentation_varying: quadrature sizes must be >= 1");
  const double d_rho = radius_m / n_rho;
  const double d_theta = 2.0 * std::numbers::pi / n_theta;
  double acc = 0.0;
  for (int i = 0; i < n_rho; ++i) {
    const double rho = (i + 0.5) * d_rho;
    double ring = 0.0;
    for (int j = 0; j < n_theta; ++j) ring += kappa(rho, (j + 0.5) * d_theta);
    acc += ring * rho * rho * rho / 2.0;  // integrand kappa rho^2/2 times area element rho
  }
  acc *= d_rho * d_theta;
  return acc / (std::numbers::pi * radius_m * radius_m);
}

/// Local surface curvature under the punch: either a single mean value or a
/// field over the punch disk in polar coordinates (rho from punch center,
/// theta around it).
struct CurvatureModel {
  [[nodiscard]] static CurvatureModel constant(double kappa_per_m) {
    CurvatureModel m;
    m.kappa_per_m = kappa_per_m;
    return m;
  }

  [[nodiscard]] static CurvatureModel varying(std::function<double(double, double)> kappa,
                                              int n_rho = 64, int n_theta = 64) {
    CurvatureModel m;
    m.kappa_field = std::move(kappa);
    m.n_rho = n_rho;
    m.n_theta = n_theta;
    return m;
  }

  [[nodiscard]] double mean_gap(double radius_m) const {
    if (kappa_field) return geometric_indentation_varying(kappa_field, radius_m, n_rho, n_theta);
    return geometric_indentation_constant(kappa_per_m, radius_m);
  }

  double kappa_per_m = 0.0;
  std::function<double(double, double)> kappa_field;
  int n_rho = 64;
  int n_theta = 64;
};

/// Undeformed signed distance at a settled punch-regime contact point:
/// phi0(p) = -(delta_flat + delta_geom), negative because the point lies
/// inside the undeformed body.
[[nodiscard]] inline double undeformed_sdf_value(double force_n, double e_star_pa,
                                                 double radius_m,
                                                 const CurvatureModel& curvature) {
  return -(flat_indentation(force_n, e_star_pa, radius_m) + curvature.mean_gap(radius_m));
}

/// Hertz low-force coefficient C = (9 kappa / (16 E*^2))^(1/3), so that
/// delta = C F^(2/3).
[[nodiscard]] inline double hertz_constant(double kappa_per_m, double e_star_pa) {
  if (!(kappa_per_m > 0.0)) throw std::invalid_argument("hertz_constant: kappa must be positive");
  if (!(e_star_pa > 0.0)) throw std::invalid_argument("hertz_constant: E* must be positive");
  return std::cbrt(9.0 * kappa_per_m / (16.0 * e_star_pa * e_star_pa));
}

[[nodiscard]] inline double hertz_indentation(double force_n, double hertz_c) {
  if (!(force_n >= 0.0)) throw std::invalid_argument("hertz_indentation: force must be >= 0");
  if (!(hertz_c > 0.0)) throw std::invalid_argument("hertz_indentation: C must be positive");
  return hertz_c * std::pow(force_n, 2.0 / 3.0);
}

/// Force above which the Hertz contact patch would exceed the punch face:
/// F_trans = (4/3) E* R^3 kappa.
[[nodiscard]] inline double transition_force(double e_star_pa, double radius_m,
                                             double kappa_per_m) {
  if (!(e_star_pa > 0.0)) throw std::invalid_argument("transition_force: E* must be positive");
  if (!(radius_m > 0.0)) throw std::invalid_argument("transition_force: radius must be positive");
  if (!(kappa_per_m >= 0.0)) throw std::invalid_argument("transition_force: kappa must be >= 0");
  return 4.0 / 3.0 * e_star_pa * radius_m * radius_m * radius_m * kappa_per_m;
}

[[nodiscard]] inline double two_point_normal_angle_deg(const ProbeRecord& a,
                                                       const ProbeRecord& b) {
  const double c = dot(normalized(a.normal), normalized(b.normal));
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

struct TwoPointOptions {
  /// Measure the displacement increment as |<p2 - p1, n>| with n the mean
  /// probe normal, instead of the full Euclidean norm.
  bool project_on_normal = false;
};

/// Two-force modulus estimate at one site (punch regime):
/// E = (F2 - F1)(1 - nu^2) / (2 R ||p2 - p1||).
[[nodiscard]] inline double estimate_youngs_two_point(const ProbeRecord& a, const ProbeRecord& b,
                                                      double nu,
                                                      const TwoPointOptions& opts = {}) {
  validate_poisson_ratio(nu);
  const ProbeRecord& lo = a.force_n <= b.force_n ? a : b;
  const ProbeRecord& hi = a.force_n <= b.force_n ? b : a;
  const double df = hi.force_n - lo.force_n;
  if (!(df > 0.0))
    throw std::invalid_argument("estimate_youngs_two_point: needs two distinct force levels");
  if (std::fabs(a.punch_radius_m - b.punch_radius_m) >
      1e-9 * std::max(a.punch_radius_m, b.punch_radius_m))
    throw std::invalid_argument("estimate_youngs_two_point: mismatched punch radii");
  if (!(a.punch_radius_m > 0.0))
    throw std::invalid_argument("estimate_youngs_two_point: punch radius must be positive");
  const Vec3 dp = hi.position - lo.position;
  double delta;
  if (opts.project_on_normal)
    delta = std::fabs(dot(dp, normalized(a.normal + b.normal)));
  else
    delta = norm(dp);
  if (!(delta > 0.0))
    throw std::invalid_argument("estimate_youngs_two_point: zero displacement between probes");
  return df * (1.0 - nu * nu) / (2.0 * a.punch_radius_m * delta);
}

struct EstimateReport {
  double youngs_pa = 0.0;
  std::optional<double> kappa_per_m;
  std::vector<double> per_sample_pa;
  double mean_pa = 0.0;
  double std_pa = 0.0;
  std::size_t sample_count = 0;
  std::vector<double> compliances_m_per_n;
  std::string note;
  int normal_warnings = 0;
};

/// Builds a report whose mean/std are consistent with the sample list
/// (sample standard deviation, n - 1 denominator).
[[nodiscard]] inline EstimateReport make_estimate_report(std::vector<double> per_sample_pa) {
  if (per_sample_pa.empty())
    throw std::invalid_argument("make_estimate_report: no samples");
  EstimateReport r;
  r.sample_count = per_sample_pa.size();
  double sum = 0.0;
  for (double v : per_sample_pa) sum += v;
  r.mean_pa = sum / static_cast<double>(r.sample_count);
  double ss = 0.0;
  for (double v : per_sample_pa) ss += (v - r.mean_pa) * (v - r.mean_pa);
  r.std_pa = r.sample_count > 1 ? std::sqrt(ss / static_cast<double>(r.sample_count - 1)) : 0.0;
  r.youngs_pa = r.mean_pa;
  r.per_sample_pa = std::move(per_sample_pa);
  return r;
}

/// Index window [begin, end) into the list of per-interval compliances.
struct ComplianceWindow {
  int begin = 0;
  int end = 0;
};

struct ComplianceOptions {
  /// Defaults: low window = first force interval, high window = last.
  std::optional<ComplianceWindow> low;
  std::optional<ComplianceWindow> high;
  /// The transition is considered observed only when m_low exceeds m_high
  /// by this relative margin.
  double transition_margin = 0.01;
};

/// Compliance-variation estimator at a single site probed at three or more
/// increasing forces: the high-force (punch) window gives E*, the low-force
/// (Hertz) window gives the local curvature.
[[nodiscard]] inline EstimateReport estimate_modulus_kappa_compliance(
    const std::vector<ProbeRecord>& probes, double nu, const ComplianceOptions& opts = {}) {
  validate_poisson_ratio(nu);
  if (probes.size() < 3)
    throw std::invalid_argument("compliance estimator: needs at least 3 probes");
  const double radius = probes.front().punch_radius_m;
  if (!(radius > 0.0))
    throw std::invalid_argument("compliance estimator: punch radius must be positive");
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (std::fabs(probes[i].punch_radius_m - radius) > 1e-9 * radius)
      throw std::invalid_argument("compliance estimator: mismatched punch radii");
    if (i > 0 && !(probes[i].force_n > probes[i - 1].force_n))
      throw std::invalid_argument("compliance estimator: forces must be strictly increasing");
  }

  const int n_intervals = static_cast<int>(probes.size()) - 1;
  std::vector<double> m(n_intervals);
  for (int j = 0; j < n_intervals; ++j) {
    const double df = probes[j + 1].force_n - probes[j].force_n;
    m[j] = norm(probes[j + 1].position - probes[j].position) / df;
  }

  const ComplianceWindow low = opts.low.value_or(ComplianceWindow{0, 1});
  const ComplianceWindow high = opts.high.value_or(ComplianceWindow{n_intervals - 1, n_intervals});
  for (const auto& w : {low, high})
    if (w.begin < 0 || w.end > n_intervals || w.begin >= w.end)
      throw std::invalid_argument("compliance estimator: window out of range");

  auto window_mean = [&](const ComplianceWindow& w, const std::vector<double>& v) {
    double s = 0.0;
    for (int j = w.begin; j < w.end; ++j) s += v[j];
    return s / (w.end - w.begin);
  };
  const double m_low = window_mean(low, m);
  const double m_high = window_mean(high, m);
  if (!(m_high > 0.0))
    throw numerical_error("compliance estimator: degenerate high-window compliance");

  double f_low = 0.0;
  for (int j = low.begin; j < low.end; ++j)
    f_low += 0.5 * (probes[j].force_n + probes[j + 1].force_n);
  f_low /= (low.end - low.begin);

  const double e_star = 1.0 / (2.0 * radius * m_high);
  EstimateReport report = make_estimate_report({e_star * (1.0 - nu * nu)});
  report.compliances_m_per_n = std::move(m);
  if (m_low > (1.0 + opts.transition_margin) * m_high) {
    report.kappa_per_m =
        1.5 * f_low * m_low * m_low * m_low / (radius * radius * m_high * m_high);
  } else {
    report.note = "no regime transition observed; kappa not estimable";
  }
  return report;
}

struct SettlingCheck {
  double settle_time_s = 0.0;
  bool ok = false;
};

/// Elastic settling-time bound T_e = l sqrt(rho / E); a contact dwell T_c is
/// quasi-static when T_c >= 10 T_e.
[[nodiscard]] inline SettlingCheck settling_time_check(double length_scale_m,
                                                       double density_kg_m3, double youngs_pa,
                                                       double contact_time_s) {
  if (!(length_scale_m > 0.0))
    throw std::invalid_argument("settling_time_check: length scale must be positive");
  if (!(density_kg_m3 > 0.0))
    throw std::invalid_argument("settling_time_check: density must be positive");
  if (!(youngs_pa > 0.0))
    throw std::invalid_argument("settling_time_check: E must be positive");
  if (!(contact_time_s > 0.0))
    throw std::invalid_argument("settling_time_check: contact time must be positive");
  SettlingCheck c;
  c.settle_time_s = length_scale_m * std::sqrt(density_kg_m3 / youngs_pa);
  c.ok = contact_time_s >= 10.0 * c.settle_time_s;
  return c;
}

}  // namespace palp
