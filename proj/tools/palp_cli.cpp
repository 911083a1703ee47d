// palp: probe-based elastic shape reconstruction toolkit.
//
// Subcommands cover the full workflow: synthesizing probe campaigns,
// estimating material parameters, reconstructing and redistancing the
// undeformed signed distance field, refinement studies, and mesh export.
// Exit codes: 0 success, 1 invalid input or configuration, 2 numerical
// failure (the elliptic solve diverged or hit its iteration cap).
// Redistancing never fails hard: it writes its best iterate and reports
// the residual and converged flag in the summary and on stderr.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "palp/contact.hpp"
#include "palp/grid_io.hpp"
#include "palp/march.hpp"
#include "palp/metrics.hpp"
#include "palp/pipeline.hpp"
#include "palp/probe_io.hpp"
#include "palp/recon.hpp"
#include "palp/reinit.hpp"
#include "palp/sim.hpp"

namespace {

using nlohmann::json;

palp::Vec3 to_vec3(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

json vec3_json(const palp::Vec3& v) { return json::array({v.x, v.y, v.z}); }

struct ShapeFlags {
  std::string kind = "sphere";
  std::vector<double> center{0.0, 0.0, 0.0};
  double radius = 0.1;
  std::vector<double> semi_axes;
  std::vector<double> plane_normal{0.0, 0.0, 1.0};
  double patch_halfwidth = 0.1;
};

void add_shape_flags(CLI::App* cmd, ShapeFlags& f) {
  cmd->add_option("--shape", f.kind, "Shape kind: sphere, plane or ellipsoid")
      ->check(CLI::IsMember({"sphere", "plane", "ellipsoid"}))
      ->capture_default_str();
  cmd->add_option("--center", f.center, "Shape center (plane: a point on it), meters")
      ->expected(3)
      ->capture_default_str();
  cmd->add_option("--radius", f.radius, "Sphere radius, meters")->capture_default_str();
  cmd->add_option("--semi-axes", f.semi_axes, "Ellipsoid semi axes, meters")->expected(3);
  cmd->add_option("--plane-normal", f.plane_normal, "Plane normal")
      ->expected(3)
      ->capture_default_str();
  cmd->add_option("--patch-halfwidth", f.patch_halfwidth,
                  "Half width of the sampled plane patch, meters")
      ->capture_default_str();
}

palp::ShapeSpec build_shape(const ShapeFlags& f) {
  if (f.kind == "sphere") return palp::ShapeSpec::sphere(to_vec3(f.center), f.radius);
  if (f.kind == "plane")
    return palp::ShapeSpec::plane(to_vec3(f.center), to_vec3(f.plane_normal), f.patch_halfwidth);
  if (f.semi_axes.size() != 3)
    throw std::invalid_argument("--semi-axes is required for ellipsoids");
  return palp::ShapeSpec::ellipsoid(to_vec3(f.center), to_vec3(f.semi_axes));
}

json shape_json(const palp::ShapeSpec& s) {
  json j;
  j["kind"] = s.kind_name();
  j["center_m"] = vec3_json(s.center());
  switch (s.kind()) {
    case palp::ShapeSpec::Kind::sphere: j["radius_m"] = s.radius(); break;
    case palp::ShapeSpec::Kind::plane:
      j["normal"] = vec3_json(s.plane_normal());
      j["patch_halfwidth_m"] = s.patch_halfwidth();
      break;
    case palp::ShapeSpec::Kind::ellipsoid: j["semi_axes_m"] = vec3_json(s.semi_axes()); break;
  }
  return j;
}

void write_manifest(const std::string& primary_output, const std::string& subcommand,
                    const std::vector<std::string>& argv, const json& config,
                    const std::vector<std::string>& outputs) {
  json m;
  m["command"] = argv;
  m["config"] = config;
  m["outputs"] = outputs;
  m["subcommand"] = subcommand;
  m["tool"] = "palp";
  m["version"] = palp::kVersion;
  const std::string path = primary_output + ".manifest.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::invalid_argument("cannot write manifest " + path);
  out << m.dump(2) << '\n';
  if (!out) throw std::invalid_argument("manifest write failed for " + path);
}

json geometry_json(const palp::GridGeometry& g) {
  json j;
  j["dims"] = json::array({g.dim(0), g.dim(1), g.dim(2)});
  j["origin_m"] = vec3_json(g.origin());
  j["spacing_m"] = g.spacing();
  return j;
}

struct SolverFlags {
  double poisson_ratio = 0.45;
  std::string boundary = "dirichlet";
  double cg_tol = 1e-8;
  int cg_max_iters = 10000;
  double constraint_weight = 1e4;
  double idw_power = 2.0;
  double reinit_tol = 1e-2;
  int reinit_max_iters = 500;
  std::optional<double> reinit_dt;
  std::optional<double> kappa;
  bool estimate_kappa = false;
  bool project_on_normal = false;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--poisson", f.poisson_ratio, "Poisson ratio of the material")
      ->capture_default_str();
  cmd->add_option("--boundary", f.boundary,
                  "Outer boundary of the Poisson solve: dirichlet (sphere guess) or natural")
      ->check(CLI::IsMember({"dirichlet", "natural"}))
      ->capture_default_str();
  cmd->add_option("--cg-tol", f.cg_tol, "Conjugate gradient relative residual target")
      ->capture_default_str();
  cmd->add_option("--cg-max-iters", f.cg_max_iters, "Conjugate gradient iteration cap")
      ->capture_default_str();
  cmd->add_option("--constraint-weight", f.constraint_weight,
                  "Point constraint penalty weight (scaled by 1/h^2 internally)")
      ->capture_default_str();
  cmd->add_option("--idw-power", f.idw_power, "Inverse distance weighting exponent")
      ->capture_default_str();
  cmd->add_option("--reinit-tol", f.reinit_tol, "Redistancing residual target")
      ->capture_default_str();
  cmd->add_option("--reinit-max-iters", f.reinit_max_iters, "Redistancing iteration cap")
      ->capture_default_str();
  cmd->add_option("--reinit-dt", f.reinit_dt, "Redistancing pseudo time step (default h/2)");
  cmd->add_option("--kappa", f.kappa, "Surface mean curvature used for the gap correction, 1/m");
  cmd->add_flag("--estimate-kappa", f.estimate_kappa,
                "Estimate the gap curvature from compliance sequences");
  cmd->add_flag("--project-on-normal", f.project_on_normal,
                "Two-point estimator: project displacement onto the mean probe normal");
}

palp::PipelineConfig build_pipeline_config(const SolverFlags& f) {
  palp::PipelineConfig cfg;
  cfg.poisson_ratio = f.poisson_ratio;
  cfg.poisson.tolerance = f.cg_tol;
  cfg.poisson.max_iterations = f.cg_max_iters;
  cfg.poisson.constraint_weight = f.constraint_weight;
  cfg.poisson.idw_power = f.idw_power;
  cfg.poisson.boundary = f.boundary == "natural" ? palp::PoissonConfig::Boundary::natural
                                                 : palp::PoissonConfig::Boundary::dirichlet_guess;
  cfg.reinit.tolerance = f.reinit_tol;
  cfg.reinit.max_iterations = f.reinit_max_iters;
  cfg.reinit.dt = f.reinit_dt;
  cfg.kappa_per_m = f.kappa;
  cfg.estimate_kappa = f.estimate_kappa;
  cfg.two_point.project_on_normal = f.project_on_normal;
  return cfg;
}

json solver_json(const SolverFlags& f) {
  json j;
  j["poisson_ratio"] = f.poisson_ratio;
  j["boundary"] = f.boundary;
  j["cg_tol"] = f.cg_tol;
  j["cg_max_iters"] = f.cg_max_iters;
  j["constraint_weight"] = f.constraint_weight;
  j["idw_power"] = f.idw_power;
  j["reinit_tol"] = f.reinit_tol;
  j["reinit_max_iters"] = f.reinit_max_iters;
  if (f.reinit_dt) j["reinit_dt"] = *f.reinit_dt;
  if (f.kappa) j["kappa_per_m"] = *f.kappa;
  j["estimate_kappa"] = f.estimate_kappa;
  j["project_on_normal"] = f.project_on_normal;
  return j;
}

palp::GridPayload parse_payload(const std::string& s) {
  return s == "sidecar" ? palp::GridPayload::sidecar_file : palp::GridPayload::inline_base64;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> argv_copy(argv, argv + argc);

  CLI::App app{"Probe-based elastic shape reconstruction toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", palp::kVersion);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Synthesize a force-controlled probe campaign");
  ShapeFlags sim_shape;
  add_shape_flags(sim_cmd, sim_shape);
  double sim_youngs = 8000.0, sim_nu = 0.45, sim_punch = 0.01, sim_sigma = 0.0;
  int sim_sites = 1;
  std::uint64_t sim_seed = 0;
  std::vector<double> sim_forces;
  std::string sim_out;
  sim_cmd->add_option("--youngs", sim_youngs, "Young modulus, Pa")->capture_default_str();
  sim_cmd->add_option("--poisson", sim_nu, "Poisson ratio")->capture_default_str();
  sim_cmd->add_option("--forces", sim_forces, "Force levels per site, N (strictly increasing)")
      ->required();
  sim_cmd->add_option("--punch-radius", sim_punch, "Punch radius, meters")->capture_default_str();
  sim_cmd->add_option("--noise-sigma", sim_sigma, "Gaussian noise level")->capture_default_str();
  sim_cmd->add_option("--sites", sim_sites, "Number of probe sites")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "Campaign seed")->capture_default_str();
  sim_cmd->add_option("--out", sim_out, "Output probe file (JSONL)")->required();

  // reconstruct
  auto* rec_cmd =
      app.add_subcommand("reconstruct", "Recover the undeformed signed distance field");
  std::string rec_probes, rec_out, rec_pseudo_out, rec_payload = "inline";
  SolverFlags rec_solver;
  int rec_grid_n = 96;
  std::vector<double> rec_grid_center;
  std::optional<double> rec_grid_side;
  rec_cmd->add_option("--probes", rec_probes, "Input probe file (JSONL)")->required();
  rec_cmd->add_option("--out", rec_out, "Output grid file")->required();
  rec_cmd->add_option("--pseudo-out", rec_pseudo_out,
                      "Optional output for the field before redistancing");
  rec_cmd->add_option("--payload", rec_payload, "Grid payload: inline or sidecar")
      ->check(CLI::IsMember({"inline", "sidecar"}))
      ->capture_default_str();
  rec_cmd->add_option("--grid-n", rec_grid_n, "Grid nodes per axis")->capture_default_str();
  rec_cmd->add_option("--grid-center", rec_grid_center,
                      "Grid center, meters (default: probe bounding box center)")
      ->expected(3);
  rec_cmd->add_option("--grid-side", rec_grid_side,
                      "Grid side length, meters (default: 1.5 x largest probe extent)");
  add_solver_flags(rec_cmd, rec_solver);

  // estimate-modulus
  auto* em_cmd =
      app.add_subcommand("estimate-modulus", "Two-point Young modulus estimate per site");
  std::string em_probes, em_out;
  double em_nu = 0.45;
  bool em_project = false;
  em_cmd->add_option("--probes", em_probes, "Input probe file (JSONL)")->required();
  em_cmd->add_option("--poisson", em_nu, "Poisson ratio")->capture_default_str();
  em_cmd->add_flag("--project-on-normal", em_project,
                   "Project displacement onto the mean probe normal");
  em_cmd->add_option("--out", em_out, "Write the JSON report here instead of stdout");

  // estimate-kappa
  auto* ek_cmd = app.add_subcommand(
      "estimate-kappa", "Curvature and modulus from per-site compliance sequences");
  std::string ek_probes, ek_out;
  double ek_nu = 0.45, ek_margin = 0.01;
  std::vector<int> ek_low, ek_high;
  ek_cmd->add_option("--probes", ek_probes, "Input probe file (JSONL)")->required();
  ek_cmd->add_option("--poisson", ek_nu, "Poisson ratio")->capture_default_str();
  ek_cmd->add_option("--low-window", ek_low,
                     "Low-force compliance window as begin end (interval indices)")
      ->expected(2);
  ek_cmd->add_option("--high-window", ek_high,
                     "High-force compliance window as begin end (interval indices)")
      ->expected(2);
  ek_cmd->add_option("--transition-margin", ek_margin,
                     "Required relative excess of low over high compliance")
      ->capture_default_str();
  ek_cmd->add_option("--out", ek_out, "Write the JSON report here instead of stdout");

  // reinit
  auto* re_cmd = app.add_subcommand("reinit", "Redistance a level set field");
  std::string re_in, re_out, re_payload = "inline";
  double re_tol = 1e-2;
  int re_max = 500;
  std::optional<double> re_dt, re_band;
  re_cmd->add_option("--in", re_in, "Input grid file")->required();
  re_cmd->add_option("--out", re_out, "Output grid file")->required();
  re_cmd->add_option("--payload", re_payload, "Grid payload: inline or sidecar")
      ->check(CLI::IsMember({"inline", "sidecar"}))
      ->capture_default_str();
  re_cmd->add_option("--tol", re_tol, "Residual target")->capture_default_str();
  re_cmd->add_option("--max-iters", re_max, "Iteration cap")->capture_default_str();
  re_cmd->add_option("--dt", re_dt, "Pseudo time step (default h/2)");
  re_cmd->add_option("--band-width", re_band, "Measure only where |input| is below this, meters");

  // convergence
  auto* cv_cmd =
      app.add_subcommand("convergence", "Noiseless refinement study over probe counts");
  ShapeFlags cv_shape;
  add_shape_flags(cv_cmd, cv_shape);
  SolverFlags cv_solver;
  double cv_youngs = 8000.0, cv_punch = 0.01, cv_grid_side = 0.3;
  std::uint64_t cv_seed = 0;
  std::vector<double> cv_forces, cv_grid_center{0.0, 0.0, 0.0};
  std::vector<int> cv_counts;
  int cv_grid_n = 64;
  std::string cv_out;
  cv_cmd->add_option("--youngs", cv_youngs, "Young modulus, Pa")->capture_default_str();
  cv_cmd->add_option("--forces", cv_forces, "Force levels per site, N")->required();
  cv_cmd->add_option("--punch-radius", cv_punch, "Punch radius, meters")->capture_default_str();
  cv_cmd->add_option("--seed", cv_seed, "Campaign seed")->capture_default_str();
  cv_cmd->add_option("--site-counts", cv_counts, "Probe site counts to sweep")->required();
  cv_cmd->add_option("--grid-n", cv_grid_n, "Grid nodes per axis")->capture_default_str();
  cv_cmd->add_option("--grid-center", cv_grid_center, "Grid center, meters")
      ->expected(3)
      ->capture_default_str();
  cv_cmd->add_option("--grid-side", cv_grid_side, "Grid side length, meters")
      ->capture_default_str();
  cv_cmd->add_option("--out", cv_out, "Output CSV")->required();
  add_solver_flags(cv_cmd, cv_solver);

  // export-mesh
  auto* xm_cmd = app.add_subcommand("export-mesh", "Triangulate the zero level set to OBJ");
  std::string xm_in, xm_out;
  xm_cmd->add_option("--in", xm_in, "Input grid file")->required();
  xm_cmd->add_option("--out", xm_out, "Output OBJ file")->required();

  // check-steady-state
  auto* ss_cmd = app.add_subcommand(
      "check-steady-state", "Elastic settling time bound and quasi-static check");
  double ss_length = 0.0, ss_density = 0.0, ss_youngs = 0.0, ss_contact = 0.0;
  std::string ss_out;
  ss_cmd->add_option("--length", ss_length, "Characteristic length, meters")->required();
  ss_cmd->add_option("--density", ss_density, "Density, kg/m^3")->required();
  ss_cmd->add_option("--youngs", ss_youngs, "Young modulus, Pa")->required();
  ss_cmd->add_option("--contact-time", ss_contact, "Contact dwell time, seconds")->required();
  ss_cmd->add_option("--out", ss_out, "Write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (sim_cmd->parsed()) {
      palp::CampaignConfig cfg;
      cfg.shape = build_shape(sim_shape);
      cfg.material = {sim_youngs, sim_nu, std::nullopt};
      cfg.forces_n = sim_forces;
      cfg.punch_radius_m = sim_punch;
      cfg.noise_sigma = sim_sigma;
      cfg.n_sites = sim_sites;
      cfg.seed = sim_seed;
      const std::vector<palp::ProbeSite> sites = palp::simulate_campaign(cfg);
      const std::vector<palp::ProbeLine> lines = palp::campaign_to_lines(sites);
      palp::write_probe_file(lines, sim_out);
      json config;
      config["shape"] = shape_json(cfg.shape);
      config["youngs_pa"] = sim_youngs;
      config["poisson_ratio"] = sim_nu;
      config["forces_N"] = sim_forces;
      config["punch_radius_m"] = sim_punch;
      config["noise_sigma"] = sim_sigma;
      config["n_sites"] = sim_sites;
      config["seed"] = sim_seed;
      write_manifest(sim_out, "simulate", argv_copy, config, {sim_out});
      json summary;
      summary["out"] = sim_out;
      summary["probes"] = lines.size();
      summary["sites"] = sites.size();
      std::cout << summary.dump(2) << '\n';
      return 0;
    }

    if (rec_cmd->parsed()) {
      const std::vector<palp::ProbeLine> lines = palp::read_probe_file(rec_probes);
      const std::vector<std::vector<palp::ProbeRecord>> sites = palp::group_sites(lines);

      palp::Vec3 lo = lines[0].p, hi = lines[0].p;
      for (const palp::ProbeLine& l : lines) {
        lo = {std::min(lo.x, l.p.x), std::min(lo.y, l.p.y), std::min(lo.z, l.p.z)};
        hi = {std::max(hi.x, l.p.x), std::max(hi.y, l.p.y), std::max(hi.z, l.p.z)};
      }
      const palp::Vec3 center = rec_grid_center.empty() ? (lo + hi) / 2.0
                                                        : to_vec3(rec_grid_center);
      const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
      const double side = rec_grid_side.value_or(1.5 * extent);
      const palp::GridGeometry geometry =
          palp::GridGeometry::centered_cube(rec_grid_n, center, side);

      const palp::PipelineConfig cfg = build_pipeline_config(rec_solver);
      const palp::PipelineResult result = palp::reconstruct_undeformed(sites, geometry, cfg);

      const palp::GridPayload payload = parse_payload(rec_payload);
      palp::write_grid(result.field, rec_out, payload);
      std::vector<std::string> outputs{rec_out};
      if (!rec_pseudo_out.empty()) {
        palp::write_grid(result.pseudo_field, rec_pseudo_out, payload);
        outputs.push_back(rec_pseudo_out);
      }
      json config = solver_json(rec_solver);
      config["probes"] = rec_probes;
      config["grid"] = geometry_json(geometry);
      config["payload"] = rec_payload;
      write_manifest(rec_out, "reconstruct", argv_copy, config, outputs);

      json summary;
      summary["youngs_pa_mean"] = result.report.mean_pa;
      summary["youngs_pa_std"] = result.report.std_pa;
      summary["sites"] = result.report.sample_count;
      summary["normal_warnings"] = result.report.normal_warnings;
      summary["kappa_used_per_m"] = result.kappa_used;
      summary["poisson_iterations"] = result.poisson.iterations;
      summary["poisson_residual"] = result.poisson.relative_residual;
      summary["reinit_iterations"] = result.reinit_iterations;
      summary["reinit_residual"] = result.reinit_residual;
      summary["reinit_converged"] = result.reinit_converged;
      summary["out"] = rec_out;
      std::cout << summary.dump(2) << '\n';
      if (!result.reinit_converged) {
        std::cerr << "reconstruct: redistancing stopped at residual " << result.reinit_residual
                  << " after " << result.reinit_iterations
                  << " iterations without reaching the target; wrote best iterate\n";
      }
      return 0;
    }

    if (em_cmd->parsed()) {
      const std::vector<palp::ProbeLine> lines = palp::read_probe_file(em_probes);
      std::vector<std::vector<palp::ProbeRecord>> sites = palp::group_sites(lines);
      palp::TwoPointOptions opts;
      opts.project_on_normal = em_project;
      std::vector<double> samples;
      int warnings = 0;
      for (std::size_t s = 0; s < sites.size(); ++s) {
        auto& recs = sites[s];
        if (recs.size() < 2)
          throw std::invalid_argument("estimate-modulus: site " + std::to_string(s) +
                                      " has fewer than 2 probes");
        samples.push_back(
            palp::estimate_youngs_two_point(recs.front(), recs.back(), em_nu, opts));
        if (palp::two_point_normal_angle_deg(recs.front(), recs.back()) > 5.0) ++warnings;
      }
      const palp::EstimateReport report = palp::make_estimate_report(samples);
      json out;
      out["youngs_pa"] = report.youngs_pa;
      out["youngs_pa_std"] = report.std_pa;
      out["sample_count"] = report.sample_count;
      out["per_sample_pa"] = report.per_sample_pa;
      out["normal_warnings"] = warnings;
      out["poisson_ratio"] = em_nu;
      if (em_out.empty()) {
        std::cout << out.dump(2) << '\n';
      } else {
        std::ofstream f(em_out, std::ios::trunc);
        if (!f) throw std::invalid_argument("cannot write " + em_out);
        f << out.dump(2) << '\n';
        json config;
        config["probes"] = em_probes;
        config["poisson_ratio"] = em_nu;
        config["project_on_normal"] = em_project;
        write_manifest(em_out, "estimate-modulus", argv_copy, config, {em_out});
      }
      return 0;
    }

    if (ek_cmd->parsed()) {
      const std::vector<palp::ProbeLine> lines = palp::read_probe_file(ek_probes);
      const std::vector<std::vector<palp::ProbeRecord>> sites = palp::group_sites(lines);
      palp::ComplianceOptions opts;
      if (!ek_low.empty()) opts.low = palp::ComplianceWindow{ek_low[0], ek_low[1]};
      if (!ek_high.empty()) opts.high = palp::ComplianceWindow{ek_high[0], ek_high[1]};
      opts.transition_margin = ek_margin;

      json site_reports = json::array();
      double youngs_sum = 0.0, kappa_sum = 0.0;
      std::size_t usable = 0, with_kappa = 0;
      for (const auto& recs : sites) {
        if (recs.size() < 3) continue;
        const palp::EstimateReport r =
            palp::estimate_modulus_kappa_compliance(recs, ek_nu, opts);
        json entry;
        entry["youngs_pa"] = r.youngs_pa;
        entry["kappa_per_m"] = r.kappa_per_m ? json(*r.kappa_per_m) : json(nullptr);
        entry["compliances_m_per_N"] = r.compliances_m_per_n;
        if (!r.note.empty()) entry["note"] = r.note;
        site_reports.push_back(entry);
        youngs_sum += r.youngs_pa;
        ++usable;
        if (r.kappa_per_m) {
          kappa_sum += *r.kappa_per_m;
          ++with_kappa;
        }
      }
      if (usable == 0)
        throw std::invalid_argument(
            "estimate-kappa: no site has 3 or more force levels; the compliance estimator "
            "needs at least two force intervals");
      json out;
      out["sites"] = site_reports;
      out["youngs_pa_mean"] = youngs_sum / static_cast<double>(usable);
      out["kappa_per_m_mean"] =
          with_kappa > 0 ? json(kappa_sum / static_cast<double>(with_kappa)) : json(nullptr);
      out["poisson_ratio"] = ek_nu;
      if (ek_out.empty()) {
        std::cout << out.dump(2) << '\n';
      } else {
        std::ofstream f(ek_out, std::ios::trunc);
        if (!f) throw std::invalid_argument("cannot write " + ek_out);
        f << out.dump(2) << '\n';
        json config;
        config["probes"] = ek_probes;
        config["poisson_ratio"] = ek_nu;
        config["transition_margin"] = ek_margin;
        if (!ek_low.empty()) config["low_window"] = ek_low;
        if (!ek_high.empty()) config["high_window"] = ek_high;
        write_manifest(ek_out, "estimate-kappa", argv_copy, config, {ek_out});
      }
      return 0;
    }

    if (re_cmd->parsed()) {
      const palp::ScalarGrid field = palp::read_grid(re_in);
      palp::ReinitConfig cfg;
      cfg.tolerance = re_tol;
      cfg.max_iterations = re_max;
      cfg.dt = re_dt;
      cfg.band_width = re_band;
      const palp::ReinitResult result = palp::reinitialize(field, cfg);
      palp::write_grid(result.field, re_out, parse_payload(re_payload));
      json config;
      config["in"] = re_in;
      config["tol"] = re_tol;
      config["max_iters"] = re_max;
      if (re_dt) config["dt"] = *re_dt;
      if (re_band) config["band_width"] = *re_band;
      config["payload"] = re_payload;
      write_manifest(re_out, "reinit", argv_copy, config, {re_out});
      json summary;
      summary["iterations"] = result.iterations;
      summary["residual"] = result.residual;
      summary["converged"] = result.converged;
      summary["out"] = re_out;
      std::cout << summary.dump(2) << '\n';
      if (!result.converged) {
        std::cerr << "reinit: stopped at residual " << result.residual << " after "
                  << result.iterations
                  << " iterations without reaching the target; wrote best iterate\n";
      }
      return 0;
    }

    if (cv_cmd->parsed()) {
      palp::CampaignConfig base;
      base.shape = build_shape(cv_shape);
      base.material = {cv_youngs, cv_solver.poisson_ratio, std::nullopt};
      base.forces_n = cv_forces;
      base.punch_radius_m = cv_punch;
      base.seed = cv_seed;
      const palp::GridGeometry geometry =
          palp::GridGeometry::centered_cube(cv_grid_n, to_vec3(cv_grid_center), cv_grid_side);
      const palp::PipelineConfig cfg = build_pipeline_config(cv_solver);
      const std::vector<palp::ConvergenceRow> rows =
          palp::convergence_study(base, cv_counts, geometry, cfg);
      palp::write_convergence_csv(rows, cv_out);
      json config = solver_json(cv_solver);
      config["shape"] = shape_json(base.shape);
      config["youngs_pa"] = cv_youngs;
      config["forces_N"] = cv_forces;
      config["punch_radius_m"] = cv_punch;
      config["seed"] = cv_seed;
      config["site_counts"] = cv_counts;
      config["grid"] = geometry_json(geometry);
      write_manifest(cv_out, "convergence", argv_copy, config, {cv_out});
      json summary;
      summary["rows"] = rows.size();
      summary["final_hausdorff_m"] = rows.back().hausdorff_m;
      summary["out"] = cv_out;
      std::cout << summary.dump(2) << '\n';
      return 0;
    }

    if (xm_cmd->parsed()) {
      const palp::ScalarGrid field = palp::read_grid(xm_in);
      const palp::TriangleMesh mesh = palp::extract_isosurface(field);
      palp::write_obj(mesh, xm_out);
      json config;
      config["in"] = xm_in;
      write_manifest(xm_out, "export-mesh", argv_copy, config, {xm_out});
      json summary;
      summary["vertices"] = mesh.vertices.size();
      summary["triangles"] = mesh.triangles.size();
      summary["out"] = xm_out;
      std::cout << summary.dump(2) << '\n';
      return 0;
    }

    if (ss_cmd->parsed()) {
      const palp::SettlingCheck check =
          palp::settling_time_check(ss_length, ss_density, ss_youngs, ss_contact);
      json out;
      out["settle_time_s"] = check.settle_time_s;
      out["contact_time_s"] = ss_contact;
      out["quasi_static"] = check.ok;
      if (ss_out.empty()) {
        std::cout << out.dump(2) << '\n';
      } else {
        std::ofstream f(ss_out, std::ios::trunc);
        if (!f) throw std::invalid_argument("cannot write " + ss_out);
        f << out.dump(2) << '\n';
        json config;
        config["length_m"] = ss_length;
        config["density_kg_m3"] = ss_density;
        config["youngs_pa"] = ss_youngs;
        config["contact_time_s"] = ss_contact;
        write_manifest(ss_out, "check-steady-state", argv_copy, config, {ss_out});
      }
      return 0;
    }
  } catch (const palp::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
