#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "palp/probe_io.hpp"
#include "palp/sim.hpp"

using Catch::Approx;
using namespace palp;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("probe lines round trip through a file bit exactly") {
  std::vector<ProbeLine> lines;
  lines.push_back({{0.1, -0.2, 1.0 / 3.0}, {0, 0, -1}, 3.0, 0.01, std::nullopt});
  lines.push_back({{1e-300, 0.0, -0.0}, {0, 1, 0}, std::nullopt, std::nullopt, -0.0152});
  lines.push_back({{0.25, 0.5, 0.75}, {1, 0, 0}, 4.5, 0.02, 1.25e-3});

  const auto path = temp_file("palp_test_probes.jsonl");
  write_probe_file(lines, path.string());
  const std::vector<ProbeLine> back = read_probe_file(path.string());

  REQUIRE(back.size() == lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    REQUIRE(back[i].p.x == lines[i].p.x);
    REQUIRE(back[i].p.y == lines[i].p.y);
    REQUIRE(back[i].p.z == lines[i].p.z);
    REQUIRE(back[i].q.x == lines[i].q.x);
    REQUIRE(back[i].q.y == lines[i].q.y);
    REQUIRE(back[i].q.z == lines[i].q.z);
    REQUIRE(back[i].force_n == lines[i].force_n);
    REQUIRE(back[i].punch_radius_m == lines[i].punch_radius_m);
    REQUIRE(back[i].value_m == lines[i].value_m);
  }

  // Writing the same lines twice produces identical bytes.
  const auto path2 = temp_file("palp_test_probes_2.jsonl");
  write_probe_file(lines, path2.string());
  REQUIRE(slurp(path) == slurp(path2));
}

TEST_CASE("probe line parser is strict") {
  const std::string good =
      R"({"force_N":3.0,"px":0.1,"py":0.2,"pz":0.3,"punch_radius_m":0.01,)"
      R"("qx":0.0,"qy":0.0,"qz":-1.0})";
  const ProbeLine ok = parse_probe_line(good);
  REQUIRE(ok.q.z == -1.0);
  REQUIRE(*ok.force_n == 3.0);
  REQUIRE_FALSE(ok.value_m.has_value());

  REQUIRE_THROWS_AS(parse_probe_line("not json"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_probe_line("[1,2,3]"), std::invalid_argument);
  REQUIRE_THROWS_AS(  // px missing
      parse_probe_line(R"({"py":0,"pz":0,"qx":0,"qy":0,"qz":1})"),
      std::invalid_argument);
  REQUIRE_THROWS_AS(  // px not a number
      parse_probe_line(R"({"px":"a","py":0,"pz":0,"qx":0,"qy":0,"qz":1})"),
      std::invalid_argument);
  REQUIRE_THROWS_AS(  // direction far from unit length
      parse_probe_line(R"({"px":0,"py":0,"pz":0,"qx":0,"qy":0,"qz":0.9})"),
      std::invalid_argument);
  REQUIRE_THROWS_AS(  // zero force
      parse_probe_line(
          R"({"force_N":0.0,"px":0,"py":0,"pz":0,"qx":0,"qy":0,"qz":1})"),
      std::invalid_argument);
  REQUIRE_THROWS_AS(  // negative punch radius
      parse_probe_line(
          R"({"punch_radius_m":-0.01,"px":0,"py":0,"pz":0,"qx":0,"qy":0,"qz":1})"),
      std::invalid_argument);

  // A direction off unit length by less than the tolerance is renormalized.
  const ProbeLine snug = parse_probe_line(
      R"({"px":0,"py":0,"pz":0,"qx":0,"qy":0,"qz":1.0005})");
  REQUIRE(norm(snug.q) == Approx(1.0).margin(1e-15));
  REQUIRE(snug.q.z == Approx(1.0).margin(1e-15));
}

TEST_CASE("probe file reader reports path and line number") {
  const auto path = temp_file("palp_test_probes_bad.jsonl");
  {
    std::ofstream out(path, std::ios::trunc);
    out << R"({"px":0,"py":0,"pz":0,"qx":0,"qy":0,"qz":1})" << "\n";
    out << "\n";
    out << "garbage\n";
  }
  try {
    (void)read_probe_file(path.string());
    FAIL("expected a parse error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find(":3:") != std::string::npos);
  }

  const auto empty_path = temp_file("palp_test_probes_empty.jsonl");
  std::ofstream(empty_path, std::ios::trunc) << "\n  \n";
  REQUIRE_THROWS_AS(read_probe_file(empty_path.string()), std::invalid_argument);
  REQUIRE_THROWS_AS(read_probe_file("/nonexistent/probes.jsonl"), std::invalid_argument);
}

TEST_CASE("record conversion requires contact fields") {
  ProbeLine line{{0, 0, 0}, {0, 0, 1}, 3.0, 0.01, std::nullopt};
  const ProbeRecord rec = to_probe_record(line);
  REQUIRE(rec.force_n == 3.0);
  REQUIRE(rec.punch_radius_m == 0.01);

  line.force_n.reset();
  REQUIRE_THROWS_AS(to_probe_record(line), std::invalid_argument);
  line.force_n = 3.0;
  line.punch_radius_m.reset();
  REQUIRE_THROWS_AS(to_probe_record(line), std::invalid_argument);

  const Pose pose = to_pose(line);
  REQUIRE(pose.normal_inward.z == 1.0);
}

TEST_CASE("site grouping splits on non increasing force") {
  auto make = [](double force) {
    return ProbeLine{{force, 0, 0}, {0, 0, 1}, force, 0.01, std::nullopt};
  };
  const std::vector<ProbeLine> lines = {make(3.0), make(4.5), make(3.0), make(4.5)};
  const auto sites = group_sites(lines);
  REQUIRE(sites.size() == 2);
  REQUIRE(sites[0].size() == 2);
  REQUIRE(sites[1].size() == 2);
  REQUIRE(sites[0][1].force_n == 4.5);

  // A single ascending run is one site; an equal force starts a new site.
  REQUIRE(group_sites({make(1.0), make(2.0), make(3.0)}).size() == 1);
  REQUIRE(group_sites({make(2.0), make(2.0)}).size() == 2);

  ProbeLine incomplete = make(3.0);
  incomplete.force_n.reset();
  REQUIRE_THROWS_AS(group_sites({incomplete}), std::invalid_argument);
}

TEST_CASE("campaign output round trips through the probe format") {
  CampaignConfig cfg;
  cfg.shape = ShapeSpec::sphere({0, 0, 0}, 0.1);
  cfg.material = {8000.0, 0.45, std::nullopt};
  cfg.forces_n = {3.0, 4.5};
  cfg.n_sites = 3;
  cfg.noise_sigma = 1e-3;
  cfg.seed = 11;
  const std::vector<ProbeSite> campaign = simulate_campaign(cfg);
  const std::vector<ProbeLine> lines = campaign_to_lines(campaign);
  REQUIRE(lines.size() == 6);

  const auto path = temp_file("palp_test_campaign.jsonl");
  write_probe_file(lines, path.string());
  const auto sites = group_sites(read_probe_file(path.string()));
  REQUIRE(sites.size() == 3);
  for (std::size_t s = 0; s < sites.size(); ++s) {
    REQUIRE(sites[s].size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
      const ProbeRecord& orig = campaign[s].records[k];
      REQUIRE(sites[s][k].position.x == orig.position.x);
      REQUIRE(sites[s][k].position.y == orig.position.y);
      REQUIRE(sites[s][k].position.z == orig.position.z);
      REQUIRE(sites[s][k].force_n == orig.force_n);
      REQUIRE(sites[s][k].normal.x == Approx(orig.normal.x).margin(1e-15));
    }
  }
}
