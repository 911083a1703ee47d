#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "palp/grid_io.hpp"
#include "palp/rng.hpp"

using namespace palp;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
  const fs::path dir = fs::temp_directory_path() / "palp_test_grid_io";
  fs::create_directories(dir);
  return dir;
}

ScalarGrid awkward_grid() {
  // Values chosen to stress the binary encoding: tiny, huge, signed zero,
  // non-terminating fractions.
  const GridGeometry g(3, {4, 5, 6}, {-0.123456789, 3.25, 1e-3}, 0.0079);
  std::vector<double> v(g.node_count());
  RandomStream rng(1234);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1e6, 1e6);
  v[0] = 1e-300;
  v[1] = -1e300;
  v[2] = -0.0;
  v[3] = 1.0 / 3.0;
  v[4] = 3.141592653589793;
  return ScalarGrid(g, std::move(v));
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace

TEST_CASE("grid files round trip bit exactly with inline payload") {
  const ScalarGrid grid = awkward_grid();
  const fs::path path = test_dir() / "inline.grid";
  write_grid(grid, path, GridPayload::inline_base64);
  const ScalarGrid back = read_grid(path);
  REQUIRE(back.geom == grid.geom);
  REQUIRE(bitwise_equal(back.values, grid.values));

  // Writing the same grid twice produces byte-identical files.
  const fs::path path2 = test_dir() / "inline2.grid";
  write_grid(grid, path2, GridPayload::inline_base64);
  REQUIRE(slurp(path) == slurp(path2));
}

TEST_CASE("grid files round trip bit exactly with sidecar payload") {
  const ScalarGrid grid = awkward_grid();
  const fs::path path = test_dir() / "sidecar.grid";
  write_grid(grid, path, GridPayload::sidecar_file);
  REQUIRE(fs::exists(test_dir() / "sidecar.grid.bin"));
  const ScalarGrid back = read_grid(path);
  REQUIRE(back.geom == grid.geom);
  REQUIRE(bitwise_equal(back.values, grid.values));
}

TEST_CASE("rank 2 grids round trip") {
  const GridGeometry g(2, {6, 4, 1}, {0.5, -0.5, 0.0}, 0.125);
  std::vector<double> v(g.node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i) * 0.37 - 2.0;
  const ScalarGrid grid(g, v);
  const fs::path path = test_dir() / "rank2.grid";
  write_grid(grid, path);
  const ScalarGrid back = read_grid(path);
  REQUIRE(back.geom == grid.geom);
  REQUIRE(back.geom.rank() == 2);
  REQUIRE(bitwise_equal(back.values, grid.values));
}

TEST_CASE("grid reader rejects malformed inputs") {
  const ScalarGrid grid = awkward_grid();
  const fs::path good = test_dir() / "good.grid";
  write_grid(grid, good);
  const std::string text = slurp(good);

  SECTION("missing file") {
    REQUIRE_THROWS_AS(read_grid(test_dir() / "does_not_exist.grid"), std::invalid_argument);
  }
  SECTION("wrong magic") {
    const fs::path p = test_dir() / "bad_magic.grid";
    spit(p, "palp-grid 2\n" + text.substr(text.find('\n') + 1));
    REQUIRE_THROWS_AS(read_grid(p), std::invalid_argument);
  }
  SECTION("unknown header key") {
    const fs::path p = test_dir() / "bad_key.grid";
    const auto pos = text.find("spacing:");
    spit(p, text.substr(0, pos) + "flavor: vanilla\n" + text.substr(pos));
    REQUIRE_THROWS_AS(read_grid(p), std::invalid_argument);
  }
  SECTION("unsupported byte order") {
    const fs::path p = test_dir() / "bad_order.grid";
    std::string t = text;
    const auto pos = t.find("little-endian");
    t.replace(pos, std::string("little-endian").size(), "big-endian");
    spit(p, t);
    REQUIRE_THROWS_AS(read_grid(p), std::invalid_argument);
  }
  SECTION("truncated payload") {
    const fs::path p = test_dir() / "truncated.grid";
    spit(p, text.substr(0, text.size() - 100));
    REQUIRE_THROWS_AS(read_grid(p), std::invalid_argument);
  }
  SECTION("count does not match payload") {
    const fs::path p = test_dir() / "bad_count.grid";
    std::string t = text;
    const auto pos = t.find("count: ");
    t.replace(pos, std::string("count: 120").size(), "count: 119");
    spit(p, t);
    REQUIRE_THROWS_AS(read_grid(p), std::invalid_argument);
  }
  SECTION("missing sidecar") {
    const fs::path p = test_dir() / "orphan.grid";
    write_grid(grid, p, GridPayload::sidecar_file);
    fs::remove(test_dir() / "orphan.grid.bin");
    REQUIRE_THROWS_AS(read_grid(p), std::invalid_argument);
  }
  SECTION("non-finite payload values") {
    const fs::path p = test_dir() / "nan.grid";
    std::vector<double> v(grid.values.size(), 0.0);
    v[7] = std::numeric_limits<double>::quiet_NaN();
    const auto bytes = detail::doubles_to_le_bytes(v);
    std::string t = text.substr(0, text.find("payload: inline\n"));
    t += "payload: inline\n";
    const std::string b64 = detail::base64_encode(bytes);
    for (std::size_t i = 0; i < b64.size(); i += 76) t += b64.substr(i, 76) + "\n";
    spit(p, t);
    REQUIRE_THROWS_AS(read_grid(p), std::invalid_argument);
  }
}
