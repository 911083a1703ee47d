#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <string>
#include <unordered_map>
#include <vector>

#include "palp/grid.hpp"
#include "palp/mc_tables.hpp"

namespace palp {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
};

/// Sum of tetrahedron volumes against the origin; positive when triangles
/// wind counterclockwise seen from outside.
[[nodiscard]] inline double signed_volume(const TriangleMesh& mesh) {
  double v6 = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    v6 += dot(a, cross(b, c));
  }
  return v6 / 6.0;
}

/// Marching-cubes triangulation of the zero level set (negative inside).
/// Vertices are shared through canonical grid-edge keys (base node id and
/// axis), which makes the mesh watertight by construction; triangles wind so
/// that normals point outward. Requires a rank-3 grid and a sign change.
[[nodiscard]] inline TriangleMesh extract_isosurface(const ScalarGrid& f) {
  const GridGeometry& g = f.geom;
  if (g.rank() != 3)
    throw std::invalid_argument("extract_isosurface: requires a rank-3 grid");
  const double h = g.spacing();

  TriangleMesh mesh;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;

  auto vertex_on_edge = [&](int bi, int bj, int bk, int axis) -> std::uint32_t {
    const std::uint64_t key = static_cast<std::uint64_t>(g.index(bi, bj, bk)) * 3 + axis;
    const auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    const std::size_t base = g.index(bi, bj, bk);
    const double va = f.values[base];
    const double vb = f.values[base + g.stride(axis)];
    const double t = va / (va - vb);
    Vec3 p = g.position(bi, bj, bk);
    (axis == 0 ? p.x : axis == 1 ? p.y : p.z) += t * h;
    const auto id = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back(p);
    edge_vertex.emplace(key, id);
    return id;
  };

  for (int i = 0; i + 1 < g.dim(0); ++i)
    for (int j = 0; j + 1 < g.dim(1); ++j)
      for (int k = 0; k + 1 < g.dim(2); ++k) {
        int case_index = 0;
        for (int c = 0; c < 8; ++c) {
          const auto& off = detail::kCubeCorner[c];
          if (f.values[g.index(i + off[0], j + off[1], k + off[2])] < 0.0)
            case_index |= 1 << c;
        }
        const auto& tris = detail::kTriangleTable[case_index];
        for (int e = 0; tris[e] >= 0; e += 3) {
          std::uint32_t v[3];
          for (int m = 0; m < 3; ++m) {
            const auto& ec = detail::kEdgeCorner[tris[e + m]];
            const auto& c0 = detail::kCubeCorner[ec[0]];
            const auto& c1 = detail::kCubeCorner[ec[1]];
            int axis = 0;
            while (c0[axis] == c1[axis]) ++axis;
            const int bi = i + std::min(c0[0], c1[0]);
            const int bj = j + std::min(c0[1], c1[1]);
            const int bk = k + std::min(c0[2], c1[2]);
            v[m] = vertex_on_edge(bi, bj, bk, axis);
          }
          // The table winds inward for the negative-inside convention.
          mesh.triangles.push_back({v[2], v[1], v[0]});
        }
      }

  if (mesh.triangles.empty())
    throw std::invalid_argument("extract_isosurface: field does not cross zero");
  return mesh;
}

inline void write_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::invalid_argument("write_obj: cannot open " + path);
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!out) throw std::invalid_argument("write_obj: write failed for " + path);
}

inline void export_mesh(const ScalarGrid& f, const std::string& path) {
  write_obj(extract_isosurface(f), path);
}

}  // namespace palp
