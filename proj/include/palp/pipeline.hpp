#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "palp/contact.hpp"
#include "palp/recon.hpp"
#include "palp/reinit.hpp"

namespace palp {

struct PipelineConfig {
  double poisson_ratio = 0.45;
  PoissonConfig poisson;
  ReinitConfig reinit;
  /// Curvature used when inverting the measured poses to the undeformed
  /// surface. Explicit value wins; otherwise estimated from compliances when
  /// requested; otherwise zero (flat-punch inversion only).
  std::optional<double> kappa_per_m;
  bool estimate_kappa = false;
  TwoPointOptions two_point;
};

struct PipelineResult {
  /// Screened Poisson solution before redistancing.
  ScalarGrid pseudo_field;
  /// Final reinitialized signed distance field.
  ScalarGrid field;
  EstimateReport report;
  double kappa_used = 0.0;
  PoissonStats poisson;
  int reinit_iterations = 0;
  double reinit_residual = 0.0;
  bool reinit_converged = false;
};

/// Full inversion: per-site two-point modulus, optional curvature from the
/// compliance sequence, per-probe undeformed offsets, screened Poisson
/// reconstruction, redistancing. Each site needs at least two distinct force
/// levels; curvature estimation additionally needs sites with three or more.
[[nodiscard]] inline PipelineResult reconstruct_undeformed(
    const std::vector<std::vector<ProbeRecord>>& sites, const GridGeometry& geometry,
    const PipelineConfig& config = {}) {
  if (sites.empty()) throw std::invalid_argument("reconstruct_undeformed: no sites");
  validate_poisson_ratio(config.poisson_ratio);

  std::vector<std::vector<ProbeRecord>> sorted = sites;
  for (std::size_t s = 0; s < sorted.size(); ++s) {
    auto& recs = sorted[s];
    if (recs.size() < 2)
      throw std::invalid_argument("reconstruct_undeformed: site " + std::to_string(s) +
                                  " has fewer than 2 probes");
    std::sort(recs.begin(), recs.end(),
              [](const ProbeRecord& a, const ProbeRecord& b) { return a.force_n < b.force_n; });
    if (!(recs.front().force_n < recs.back().force_n))
      throw std::invalid_argument("reconstruct_undeformed: site " + std::to_string(s) +
                                  " has no two distinct force levels");
  }

  // Per-site two-point modulus from the lowest/highest force pair.
  std::vector<double> samples;
  int warnings = 0;
  samples.reserve(sorted.size());
  for (const auto& recs : sorted) {
    samples.push_back(estimate_youngs_two_point(recs.front(), recs.back(), config.poisson_ratio,
                                                config.two_point));
    if (two_point_normal_angle_deg(recs.front(), recs.back()) > 5.0) ++warnings;
  }
  EstimateReport report = make_estimate_report(samples);
  report.normal_warnings = warnings;
  const double e_star = plane_strain_modulus(report.youngs_pa, config.poisson_ratio);

  // Curvature for the gap correction.
  double kappa = 0.0;
  if (config.kappa_per_m) {
    kappa = *config.kappa_per_m;
  } else if (config.estimate_kappa) {
    std::vector<double> kappas;
    for (const auto& recs : sorted) {
      if (recs.size() < 3) continue;
      const EstimateReport site =
          estimate_modulus_kappa_compliance(recs, config.poisson_ratio, {});
      if (site.kappa_per_m) kappas.push_back(*site.kappa_per_m);
    }
    if (kappas.empty())
      throw std::invalid_argument(
          "reconstruct_undeformed: curvature estimation requested but no site shows a "
          "compliance regime transition");
    double sum = 0.0;
    for (double k : kappas) sum += k;
    kappa = sum / static_cast<double>(kappas.size());
  }
  report.kappa_per_m = config.estimate_kappa || config.kappa_per_m
                           ? std::optional<double>(kappa)
                           : std::nullopt;
  const CurvatureModel gap_model = CurvatureModel::constant(std::max(kappa, 0.0));

  // Every probe contributes a pose; its constraint value is the signed
  // distance of the measured (deformed) point to the undeformed surface.
  std::vector<Pose> poses;
  std::vector<double> values;
  for (const auto& recs : sorted) {
    for (const ProbeRecord& r : recs) {
      poses.push_back(Pose{r.position, r.normal});
      values.push_back(r.value_m ? *r.value_m
                                 : undeformed_sdf_value(r.force_n, e_star, r.punch_radius_m,
                                                        gap_model));
    }
  }

  PipelineResult result{ScalarGrid(geometry), ScalarGrid(geometry), std::move(report), kappa,
                        PoissonStats{}, 0, 0.0, false};
  result.pseudo_field = reconstruct_pseudo_sdf(PoseSet(std::move(poses)), values, geometry,
                                               config.poisson, &result.poisson);
  ReinitResult re = reinitialize(result.pseudo_field, config.reinit);
  result.field = std::move(re.field);
  result.reinit_iterations = re.iterations;
  result.reinit_residual = re.residual;
  result.reinit_converged = re.converged;
  return result;
}

}  // namespace palp
