#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "palp/contact.hpp"
#include "palp/recon.hpp"
#include "palp/sim.hpp"

namespace palp {

/// One probe observation as stored on disk: contact point p, inward unit
/// normal q, and optional force, punch radius and constraint value.
struct ProbeLine {
  Vec3 p;
  Vec3 q;
  std::optional<double> force_n;
  std::optional<double> punch_radius_m;
  std::optional<double> value_m;
};

namespace detail {

inline double require_finite_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("probe line: missing key ") + key);
  if (!j.at(key).is_number())
    throw std::invalid_argument(std::string("probe line: key ") + key + " is not a number");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v))
    throw std::invalid_argument(std::string("probe line: non-finite value for ") + key);
  return v;
}

inline std::optional<double> optional_finite_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  if (!j.at(key).is_number())
    throw std::invalid_argument(std::string("probe line: key ") + key + " is not a number");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v))
    throw std::invalid_argument(std::string("probe line: non-finite value for ") + key);
  return v;
}

}  // namespace detail

[[nodiscard]] inline ProbeLine parse_probe_line(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("probe line: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("probe line: not a JSON object");
  ProbeLine line;
  line.p = {detail::require_finite_number(j, "px"), detail::require_finite_number(j, "py"),
            detail::require_finite_number(j, "pz")};
  line.q = {detail::require_finite_number(j, "qx"), detail::require_finite_number(j, "qy"),
            detail::require_finite_number(j, "qz")};
  const double qn = norm(line.q);
  if (std::fabs(qn - 1.0) > 1e-3)
    throw std::invalid_argument("probe line: normal deviates from unit length by more than 1e-3");
  line.q = line.q / qn;
  line.force_n = detail::optional_finite_number(j, "force_N");
  line.punch_radius_m = detail::optional_finite_number(j, "punch_radius_m");
  line.value_m = detail::optional_finite_number(j, "value_m");
  if (line.force_n && !(*line.force_n > 0.0))
    throw std::invalid_argument("probe line: force_N must be positive");
  if (line.punch_radius_m && !(*line.punch_radius_m > 0.0))
    throw std::invalid_argument("probe line: punch_radius_m must be positive");
  return line;
}

[[nodiscard]] inline std::string format_probe_line(const ProbeLine& line) {
  nlohmann::json j;
  if (line.force_n) j["force_N"] = *line.force_n;
  j["px"] = line.p.x;
  j["py"] = line.p.y;
  j["pz"] = line.p.z;
  if (line.punch_radius_m) j["punch_radius_m"] = *line.punch_radius_m;
  j["qx"] = line.q.x;
  j["qy"] = line.q.y;
  j["qz"] = line.q.z;
  if (line.value_m) j["value_m"] = *line.value_m;
  return j.dump();
}

/// Reads a JSONL probe file: one JSON object per line, blank lines ignored.
[[nodiscard]] inline std::vector<ProbeLine> read_probe_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("read_probe_file: cannot open " + path);
  std::vector<ProbeLine> lines;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      lines.push_back(parse_probe_line(text));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (lines.empty()) throw std::invalid_argument("read_probe_file: no probe lines in " + path);
  return lines;
}

inline void write_probe_file(const std::vector<ProbeLine>& lines, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::invalid_argument("write_probe_file: cannot open " + path);
  for (const ProbeLine& l : lines) out << format_probe_line(l) << '\n';
  if (!out) throw std::invalid_argument("write_probe_file: write failed for " + path);
}

[[nodiscard]] inline ProbeRecord to_probe_record(const ProbeLine& line) {
  if (!line.force_n)
    throw std::invalid_argument("probe line: force_N required for contact analysis");
  if (!line.punch_radius_m)
    throw std::invalid_argument("probe line: punch_radius_m required for contact analysis");
  return ProbeRecord{line.p, line.q, *line.force_n, *line.punch_radius_m, line.value_m};
}

[[nodiscard]] inline Pose to_pose(const ProbeLine& line) { return Pose{line.p, line.q}; }

/// Splits a probe file into sites: each site is a maximal run of consecutive
/// lines with strictly increasing force, matching how campaigns are written
/// (all forces of one site, ascending, then the next site).
[[nodiscard]] inline std::vector<std::vector<ProbeRecord>> group_sites(
    const std::vector<ProbeLine>& lines) {
  std::vector<std::vector<ProbeRecord>> sites;
  for (const ProbeLine& l : lines) {
    const ProbeRecord rec = to_probe_record(l);
    if (sites.empty() || sites.back().back().force_n >= rec.force_n)
      sites.emplace_back();
    sites.back().push_back(rec);
  }
  return sites;
}

[[nodiscard]] inline std::vector<ProbeLine> campaign_to_lines(const std::vector<ProbeSite>& sites) {
  std::vector<ProbeLine> lines;
  for (const ProbeSite& s : sites)
    for (const ProbeRecord& r : s.records)
      lines.push_back(ProbeLine{r.position, r.normal, r.force_n, r.punch_radius_m, r.value_m});
  return lines;
}

}  // namespace palp
