#include "trisdf/meshing.hpp"

#include <cmath>
#include <unordered_map>

namespace trisdf {

Vec3 ScalarGrid::node_position(int i, int j, int k) const {
  const Vec3 ext = bbox.extent();
  const real inv = real(1) / real(resolution - 1);
  return {bbox.lo.x + ext.x * (real(i) * inv), bbox.lo.y + ext.y * (real(j) * inv),
          bbox.lo.z + ext.z * (real(k) * inv)};
}

void ScalarGrid::validate() const {
  if (resolution < 2) throw ContractError("scalar grid resolution must be >= 2");
  bbox.validate();
  const std::size_t expect = static_cast<std::size_t>(resolution) * resolution * resolution;
  if (values.size() != expect) throw ContractError("scalar grid value count mismatch");
  for (real v : values)
    if (!std::isfinite(v)) throw ContractError("scalar grid holds a non-finite value");
}

ScalarGrid sample_sdf_grid(const std::function<real(const Vec3&)>& sdf, const Aabb& bbox,
                           int resolution) {
  if (resolution < 2) throw InputError("sample_sdf_grid: resolution must be >= 2");
  bbox.validate();
  ScalarGrid grid;
  grid.resolution = resolution;
  grid.bbox = bbox;
  grid.values.resize(static_cast<std::size_t>(resolution) * resolution * resolution);
  std::size_t idx = 0;
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j)
      for (int k = 0; k < resolution; ++k) grid.values[idx++] = sdf(grid.node_position(i, j, k));
  return grid;
}

namespace {

// Corner layout (lower z face first, counter-clockwise from the
// lattice node):
//   0:(i,j,k) 1:(i+1,j,k) 2:(i+1,j+1,k) 3:(i,j+1,k)
//   4..7: same with k+1
constexpr int kCornerOffset[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
};
constexpr int kEdgeCorners[12][2] = {
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
    {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
};

std::uint64_t node_id(int i, int j, int k, int res) {
  return (static_cast<std::uint64_t>(i) * res + j) * res + k;
}

}  // namespace

TriangleMesh marching_cubes(const ScalarGrid& grid, real level, bool positive_inside) {
  grid.validate();
  const int res = grid.resolution;

  // nudge exact-level nodes off the surface
  auto value_at = [&](int i, int j, int k) {
    real v = grid.at(i, j, k);
    return v == level ? level + real(1e-12) : v;
  };

  TriangleMesh mesh;
  // grid edge (smaller node id, axis) -> welded vertex index
  std::unordered_map<std::uint64_t, int> edge_vertices;
  edge_vertices.reserve(static_cast<std::size_t>(res) * res);

  auto edge_vertex = [&](int ci[3], int cj[3], real va, real vb) {
    // canonical key: lower node id plus the axis of the edge
    int axis = ci[0] != cj[0] ? 0 : (ci[1] != cj[1] ? 1 : 2);
    const int* lo = (ci[axis] < cj[axis]) ? ci : cj;
    std::uint64_t key = node_id(lo[0], lo[1], lo[2], res) * 3 + axis;
    auto it = edge_vertices.find(key);
    if (it != edge_vertices.end()) return it->second;

    const real t = (level - va) / (vb - va);  // exact linear zero crossing
    Vec3 a = grid.node_position(ci[0], ci[1], ci[2]);
    Vec3 b = grid.node_position(cj[0], cj[1], cj[2]);
    Vec3 p = a + (b - a) * t;
    const int idx = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(p);
    edge_vertices.emplace(key, idx);
    return idx;
  };

  // With the classic tables, triangles face the below-level region, so
  // inside-positive data already winds outward.
  const bool flip = !positive_inside;

  real corner_values[8];
  int corner_nodes[8][3];
  int edge_index[12];
  for (int i = 0; i + 1 < res; ++i) {
    for (int j = 0; j + 1 < res; ++j) {
      for (int k = 0; k + 1 < res; ++k) {
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          corner_nodes[c][0] = i + kCornerOffset[c][0];
          corner_nodes[c][1] = j + kCornerOffset[c][1];
          corner_nodes[c][2] = k + kCornerOffset[c][2];
          corner_values[c] = value_at(corner_nodes[c][0], corner_nodes[c][1], corner_nodes[c][2]);
          if (corner_values[c] < level) cube |= 1 << c;
        }
        const int edges = detail::kMcEdgeTable[cube];
        if (edges == 0) continue;
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          const int a = kEdgeCorners[e][0];
          const int b = kEdgeCorners[e][1];
          edge_index[e] =
              edge_vertex(corner_nodes[a], corner_nodes[b], corner_values[a], corner_values[b]);
        }
        const int* tri = detail::kMcTriTable[cube];
        for (int t = 0; tri[t] != -1; t += 3) {
          int v0 = edge_index[tri[t]];
          int v1 = edge_index[tri[t + 1]];
          int v2 = edge_index[tri[t + 2]];
          if (v0 == v1 || v1 == v2 || v0 == v2) continue;  // collapsed after welding
          if (flip) std::swap(v1, v2);
          mesh.faces.push_back({v0, v1, v2});
        }
      }
    }
  }
  return mesh;
}

}  // namespace trisdf
