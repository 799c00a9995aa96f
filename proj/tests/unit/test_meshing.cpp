#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support/oracles.hpp"
#include "trisdf/field.hpp"
#include "trisdf/meshing.hpp"
#include "trisdf/metrics.hpp"

using namespace trisdf;

TEST_SUITE_BEGIN("meshing");

namespace {

real sphere_sdf(const Vec3& p, real r = 0.5) { return r - p.norm(); }  // inside-positive

TriangleMesh extract_sphere(int res, real r = 0.5) {
  const auto grid = sample_sdf_grid([&](const Vec3& p) { return sphere_sdf(p, r); }, Aabb{}, res);
  return marching_cubes(grid, 0, true);
}

}  // namespace

TEST_CASE("grid nodes land on the analytic surface exactly") {
  // res 5 over [-1,1]: nodes at -1, -0.5, 0, 0.5, 1; (0.5, 0, 0) is on r=0.5
  const auto grid = sample_sdf_grid([](const Vec3& p) { return sphere_sdf(p); }, Aabb{}, 5);
  CHECK(std::abs(grid.at(3, 2, 2)) < 1e-12);
  CHECK(grid.at(2, 2, 2) == doctest::Approx(0.5).epsilon(1e-15));  // center is inside
}

TEST_CASE("constant fields sample to constant grids") {
  const auto grid = sample_sdf_grid([](const Vec3&) { return real(0.25); }, Aabb{}, 4);
  for (real v : grid.values) CHECK(v == 0.25);
}

TEST_CASE("grid sampling of a learned field matches per-point evaluation") {
  ad::ParamStore store;
  const TriplaneGrid tg = TriplaneGrid::create(store, 6, 2, Aabb{});
  const PositionalEncoder enc{2};
  const SdfColorNetwork net =
      SdfColorNetwork::create(store, tg.feature_dim() + enc.dim_per_point(), 8, 7);
  const LearnedField field(store, net, tg, enc);
  const auto grid =
      sample_sdf_grid([&](const Vec3& p) { return field.sdf(p); }, Aabb{}, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k)
        CHECK(grid.at(i, j, k) == field.sdf(grid.node_position(i, j, k)));
}

TEST_CASE("single-cell extraction interpolates the exact linear crossing") {
  ScalarGrid grid;
  grid.resolution = 2;
  grid.bbox = Aabb{{0, 0, 0}, {1, 1, 1}};
  // corner (0,0,0) inside (positive), everything else outside
  grid.values.assign(8, -1.0);
  grid.values[0] = 3.0;  // index (0,0,0)
  const TriangleMesh mesh = marching_cubes(grid, 0, true);
  REQUIRE(mesh.faces.size() == 1);
  REQUIRE(mesh.vertices.size() == 3);
  // crossing at t = (0 - 3)/(-1 - 3) = 0.75 along each incident edge
  for (const Vec3& v : mesh.vertices) {
    const real coords[3] = {v.x, v.y, v.z};
    int on_axis = 0;
    for (real c : coords) {
      if (std::abs(c - 0.75) < 1e-12) ++on_axis;
      else CHECK(std::abs(c) < 1e-12);
    }
    CHECK(on_axis == 1);
  }
}

TEST_CASE("sphere extraction is watertight with the right topology and winding") {
  const TriangleMesh mesh = extract_sphere(64);
  CHECK(mesh.faces.size() > 1000);
  CHECK(boundary_edge_count(mesh) == 0);
  CHECK(euler_characteristic(mesh) == 2);
  // outward winding encloses positive volume close to the sphere's
  const real volume = signed_volume(mesh);
  const real expect = 4.0 / 3.0 * M_PI * 0.125;
  CHECK(volume > 0);
  CHECK(std::abs(volume - expect) / expect < 0.01);
}

TEST_CASE("sphere vertices sit within two cells of the surface") {
  const int res = 128;
  const TriangleMesh mesh = extract_sphere(res);
  const real cell = 2.0 / (res - 1);
  for (const Vec3& v : mesh.vertices) CHECK(std::abs(v.norm() - 0.5) < 2 * cell);
}

TEST_CASE("grids without a crossing produce an empty mesh") {
  ScalarGrid grid;
  grid.resolution = 3;
  grid.bbox = Aabb{};
  grid.values.assign(27, 1.0);
  CHECK(marching_cubes(grid, 0, true).faces.empty());
  grid.values.assign(27, -2.0);
  CHECK(marching_cubes(grid, 0, true).faces.empty());
}

TEST_CASE("negating the grid keeps vertices and flips the winding") {
  const int res = 24;
  auto grid = sample_sdf_grid([](const Vec3& p) { return sphere_sdf(p); }, Aabb{}, res);
  const TriangleMesh a = marching_cubes(grid, 0, true);
  for (real& v : grid.values) v = -v;
  const TriangleMesh b = marching_cubes(grid, 0, true);

  REQUIRE(a.vertices.size() == b.vertices.size());
  REQUIRE(a.faces.size() == b.faces.size());
  auto key = [](const Vec3& v) { return std::array<real, 3>{v.x, v.y, v.z}; };
  std::vector<std::array<real, 3>> va, vb;
  for (const Vec3& v : a.vertices) va.push_back(key(v));
  for (const Vec3& v : b.vertices) vb.push_back(key(v));
  std::sort(va.begin(), va.end());
  std::sort(vb.begin(), vb.end());
  CHECK(va == vb);
  CHECK(signed_volume(a) > 0);
  CHECK(signed_volume(b) == doctest::Approx(-signed_volume(a)).epsilon(1e-12));
}

TEST_CASE("exact-level nodes do not produce degenerate faces") {
  // nodes at +-0.5 lie exactly on the surface at res 5
  const TriangleMesh mesh = extract_sphere(5);
  validate_mesh(mesh);  // no repeated indices
  for (const auto& f : mesh.faces) {
    const real area = triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]],
                                    mesh.vertices[f[2]]);
    CHECK(area > 0);
  }
}

TEST_CASE("refining the grid tightens the surface") {
  const PointCloud reference = testing::sample_sphere_surface({0, 0, 0}, 0.5, 20000, 5);
  real previous = 1e9;
  for (int res : {32, 64, 128}) {
    const TriangleMesh mesh = extract_sphere(res);
    const PointCloud sampled = sample_points_on_mesh(mesh, 20000, 9);
    const real d = chamfer(sampled, reference);
    CHECK(d < previous);
    previous = d;
  }
  CHECK(previous < 2e-3);
}

TEST_SUITE_END();
