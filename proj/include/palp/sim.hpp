#pragma once

#include <cstdint>
#include <vector>

#include "palp/contact.hpp"
#include "palp/rng.hpp"
#include "palp/shapes.hpp"

namespace palp {

/// One simulated palpation site: the true surface point plus the recorded
/// probe at each force level (ground truth kept for tests and studies).
struct ProbeSite {
  Vec3 surface_point;
  double kappa_per_m = 0.0;
  std::vector<ProbeRecord> records;
};

struct CampaignConfig {
  ShapeSpec shape = ShapeSpec::sphere({0.0, 0.0, 0.0}, 0.1);
  MaterialParams material;
  std::vector<double> forces_n;
  double punch_radius_m = 0.01;
  double noise_sigma = 0.0;
  int n_sites = 1;
  std::uint64_t seed = 0;
};

/// Uniform-area random surface point of a shape.
[[nodiscard]] inline Vec3 sample_surface_point(const ShapeSpec& shape, RandomStream& rng) {
  switch (shape.kind()) {
    case ShapeSpec::Kind::sphere:
      return shape.center() + shape.radius() * rng.unit_vector();
    case ShapeSpec::Kind::plane: {
      const Vec3 n = shape.plane_normal();
      const Vec3 helper = std::fabs(n.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
      const Vec3 t1 = normalized(cross(n, helper));
      const Vec3 t2 = cross(n, t1);
      const double w = shape.patch_halfwidth();
      return shape.center() + rng.uniform(-w, w) * t1 + rng.uniform(-w, w) * t2;
    }
    case ShapeSpec::Kind::ellipsoid: {
      // Rejection against the area element of the unit-sphere parametrization.
      const Vec3 a = shape.semi_axes();
      const double gmax = std::max({a.y * a.z, a.x * a.z, a.x * a.y});
      for (;;) {
        const Vec3 u = rng.unit_vector();
        const double g = std::sqrt(u.x * u.x * a.y * a.y * a.z * a.z +
                                   u.y * u.y * a.x * a.x * a.z * a.z +
                                   u.z * u.z * a.x * a.x * a.y * a.y);
        if (rng.uniform01() * gmax <= g)
          return shape.center() + Vec3{a.x * u.x, a.y * u.y, a.z * u.z};
      }
    }
  }
  return {};
}

/// Forward model of one force-controlled probe at surface point x0. The Hertz
/// regime applies below the transition force, the flat-punch-plus-gap model at
/// and above it; the regimes are not blended. Noise: independent N(0, sigma^2)
/// per position component (meters) and per inward-normal component
/// (dimensionless, renormalized afterwards). Draw order per probe is fixed:
/// three position components, then three normal components.
[[nodiscard]] inline ProbeRecord simulate_probe(const ShapeSpec& shape,
                                                const MaterialParams& material, const Vec3& x0,
                                                double force_n, double punch_radius_m,
                                                double noise_sigma, RandomStream& rng) {
  if (!(force_n >= 0.0)) throw std::invalid_argument("simulate_probe: force must be >= 0");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("simulate_probe: sigma must be >= 0");
  const double e_star = plane_strain_modulus(material.youngs_pa, material.poisson);
  const Vec3 n_out = shape.outward_normal(x0);
  const double kappa = shape.mean_curvature(x0);
  const double f_trans = kappa > 0.0 ? transition_force(e_star, punch_radius_m, kappa) : 0.0;

  double depth;
  if (force_n < f_trans)
    depth = hertz_indentation(force_n, hertz_constant(kappa, e_star));
  else
    depth = flat_indentation(force_n, e_star, punch_radius_m) +
            CurvatureModel::constant(kappa).mean_gap(punch_radius_m);

  const Vec3 pos_noise = rng.gaussian_vec3(noise_sigma);
  const Vec3 normal_noise = rng.gaussian_vec3(noise_sigma);

  ProbeRecord rec;
  rec.position = x0 - depth * n_out + pos_noise;
  rec.normal = normalized(-n_out + normal_noise);
  rec.force_n = force_n;
  rec.punch_radius_m = punch_radius_m;
  return rec;
}

/// Simulates a full campaign: n_sites random surface sites, probed once per
/// force level in ascending order. Each site has its own random stream
/// derived from (seed, site index), so results are bit-reproducible and sites
/// are independent of the total count.
[[nodiscard]] inline std::vector<ProbeSite> simulate_campaign(const CampaignConfig& cfg) {
  if (cfg.n_sites < 1) throw std::invalid_argument("simulate_campaign: need at least one site");
  if (cfg.forces_n.empty())
    throw std::invalid_argument("simulate_campaign: need at least one force level");
  for (std::size_t i = 1; i < cfg.forces_n.size(); ++i)
    if (!(cfg.forces_n[i] > cfg.forces_n[i - 1]))
      throw std::invalid_argument("simulate_campaign: forces must be strictly increasing");
  if (!(cfg.punch_radius_m > 0.0))
    throw std::invalid_argument("simulate_campaign: punch radius must be positive");

  std::vector<ProbeSite> sites;
  sites.reserve(cfg.n_sites);
  for (int s = 0; s < cfg.n_sites; ++s) {
    RandomStream rng = RandomStream::for_site(cfg.seed, static_cast<std::uint64_t>(s));
    ProbeSite site;
    site.surface_point = sample_surface_point(cfg.shape, rng);
    site.kappa_per_m = cfg.shape.mean_curvature(site.surface_point);
    site.records.reserve(cfg.forces_n.size());
    for (double f : cfg.forces_n)
      site.records.push_back(simulate_probe(cfg.shape, cfg.material, site.surface_point, f,
                                            cfg.punch_radius_m, cfg.noise_sigma, rng));
    sites.push_back(std::move(site));
  }
  return sites;
}

}  // namespace palp
