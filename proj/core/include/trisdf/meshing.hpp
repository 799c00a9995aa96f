#pragma once

#include <functional>
#include <vector>

#include "trisdf/geometry.hpp"

namespace trisdf {

// Scalar samples on a node-aligned lattice over a box: node (i, j, k)
// sits at bbox.lo + (i, j, k) / (resolution - 1) * bbox.extent().
struct ScalarGrid {
  int resolution = 2;  // nodes per axis
  Aabb bbox;
  std::vector<real> values;  // index (i * res + j) * res + k

  real at(int i, int j, int k) const {
    return values[(static_cast<std::size_t>(i) * resolution + j) * resolution + k];
  }
  Vec3 node_position(int i, int j, int k) const;
  void validate() const;
};

ScalarGrid sample_sdf_grid(const std::function<real(const Vec3&)>& sdf, const Aabb& bbox,
                           int resolution);

// Triangulates the level set with the standard 256-case lookup and
// linear edge interpolation. Vertices are welded across cells, so a
// level set fully interior to the grid comes out watertight. Winding is
// outward for `positive_inside` data (flip the flag for
// outside-positive fields). Nodes exactly at the level are nudged by
// +1e-12 to dodge degenerate triangles.
TriangleMesh marching_cubes(const ScalarGrid& grid, real level = 0,
                            bool positive_inside = true);

namespace detail {
extern const int kMcEdgeTable[256];
extern const int kMcTriTable[256][16];
}  // namespace detail

}  // namespace trisdf
