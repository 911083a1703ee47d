#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "palp/grid.hpp"

namespace palp {

struct ReinitConfig {
  /// Convergence target: max |grad norm - 1| over the measured nodes.
  double tolerance = 1e-2;
  /// Pseudo-time step; defaults to 0.5 h (CFL-safe for the upwind scheme).
  std::optional<double> dt;
  int max_iterations = 500;
  /// Optional narrow band half-width (meters). When set, updates only run
  /// where |phi_hat| < band_width and the residual is measured there; nodes
  /// outside the band keep their input values.
  std::optional<double> band_width;
};

struct ReinitResult {
  ScalarGrid field;
  int iterations = 0;
  /// Max |grad norm - 1| over interior nodes off the skeleton band (and
  /// inside the narrow band when one is configured).
  double residual = 0.0;
  bool converged = false;
};

/// Smoothed sign s = phi / sqrt(phi^2 + h^2); zero only where phi is zero.
[[nodiscard]] inline ScalarGrid smoothed_sign(const ScalarGrid& phi) {
  const double h2 = phi.geom.spacing() * phi.geom.spacing();
  ScalarGrid s(phi.geom);
  for (std::size_t i = 0; i < phi.values.size(); ++i) {
    const double v = phi.values[i];
    s.values[i] = v / std::sqrt(v * v + h2);
  }
  return s;
}

/// Restores the unit-gradient property while keeping the zero set in place:
/// phi <- phi - dt s(phi_hat) (|grad phi| - 1), with the smoothed sign and
/// the upwind direction both taken from the original field. The residual is
/// measured over interior nodes excluding the skeleton band of the current
/// iterate (equidistant ridges cannot reach |grad| = 1). Non-convergence is
/// reported through the result, not thrown; the best iterate seen is
/// returned.
[[nodiscard]] inline ReinitResult reinitialize(const ScalarGrid& phi_hat,
                                               const ReinitConfig& config = {}) {
  const GridGeometry& g = phi_hat.geom;
  const double h = g.spacing();
  const double dt = config.dt.value_or(0.5 * h);
  if (!(config.tolerance > 0.0) || config.max_iterations < 0 || !(dt > 0.0))
    throw std::invalid_argument("reinitialize: bad configuration");
  if (config.band_width && !(*config.band_width > 0.0))
    throw std::invalid_argument("reinitialize: band width must be positive");

  const auto [lo, hi] =
      std::minmax_element(phi_hat.values.begin(), phi_hat.values.end());
  if (*lo > 0.0 || *hi < 0.0)
    throw std::invalid_argument("reinitialize: field has no zero crossing to anchor");

  const ScalarGrid sign = smoothed_sign(phi_hat);
  auto in_band = [&](std::size_t id) {
    return !config.band_width || std::fabs(phi_hat.values[id]) < *config.band_width;
  };

  auto measure = [&](const ScalarGrid& f) {
    const ScalarGrid gn = gradient_norm_godunov(f, phi_hat);
    const std::vector<std::uint8_t> skel = skeleton_band(f);
    double max_res = 0.0;
    detail::for_each_node(g, [&](int i, int j, int k, std::size_t id) {
      if (g.is_boundary(i, j, k) || skel[id] || !in_band(id)) return;
      max_res = std::max(max_res, std::fabs(gn.values[id] - 1.0));
    });
    return max_res;
  };

  ScalarGrid phi = phi_hat;
  ReinitResult best{phi, 0, measure(phi), false};
  if (best.residual < config.tolerance) {
    best.converged = true;
    return best;
  }

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const ScalarGrid gn = gradient_norm_godunov(phi, phi_hat);
    for (std::size_t i = 0; i < phi.values.size(); ++i)
      if (in_band(i)) phi.values[i] -= dt * sign.values[i] * (gn.values[i] - 1.0);

    const double res = measure(phi);
    if (res < best.residual) {
      best.field = phi;
      best.iterations = iter;
      best.residual = res;
    }
    if (res < config.tolerance) {
      best.field = std::move(phi);
      best.iterations = iter;
      best.residual = res;
      best.converged = true;
      return best;
    }
  }
  return best;
}

}  // namespace palp
