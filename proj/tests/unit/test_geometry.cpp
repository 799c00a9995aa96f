#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "trisdf/geometry.hpp"

using namespace trisdf;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("ray through the principal point follows the camera forward axis") {
  Camera cam;
  cam.fx = cam.fy = 80;
  cam.cx = 32;
  cam.cy = 32;
  cam.width = cam.height = 64;
  const Ray ray = ray_for_pixel(cam, 31.5, 31.5);  // center lands on (cx, cy)
  CHECK(ray.direction.x == doctest::Approx(0).epsilon(1e-15));
  CHECK(ray.direction.y == doctest::Approx(0).epsilon(1e-15));
  CHECK(ray.direction.z == doctest::Approx(1));
  CHECK(ray.origin == Vec3{0, 0, 0});
}

TEST_CASE("translating the camera shifts ray origins only") {
  Camera cam;
  cam.fx = cam.fy = 80;
  cam.cx = cam.cy = 32;
  cam.width = cam.height = 64;
  const Ray base = ray_for_pixel(cam, 10, 20);
  cam.pose.translation = {0.3, -0.7, 2.0};
  const Ray moved = ray_for_pixel(cam, 10, 20);
  CHECK(moved.origin == cam.pose.translation);
  CHECK(moved.direction.x == base.direction.x);
  CHECK(moved.direction.y == base.direction.y);
  CHECK(moved.direction.z == base.direction.z);
}

TEST_CASE("pinhole geometry for an off-center pixel") {
  // fx=fy=100, cx=cy=50, pixel (99.5, 49.5): offset (0.5, 0, 1) normalized
  Camera cam;
  cam.fx = cam.fy = 100;
  cam.cx = cam.cy = 50;
  cam.width = cam.height = 100;
  const Ray ray = ray_for_pixel(cam, 99.5, 49.5);
  const Vec3 expect = Vec3{0.5, 0, 1}.normalized();
  CHECK(ray.direction.x == doctest::Approx(expect.x).epsilon(1e-14));
  CHECK(ray.direction.y == doctest::Approx(expect.y).epsilon(1e-14));
  CHECK(ray.direction.z == doctest::Approx(expect.z).epsilon(1e-14));
}

TEST_CASE("rays are unit length for every pixel and bounds are enforced") {
  const Camera cam = make_lookat_camera({2, 1, -3}, {0, 0, 0}, {0, 0, 1}, 90, 90, 32, 24);
  for (int y = 0; y < cam.height; y += 5)
    for (int x = 0; x < cam.width; x += 5)
      CHECK(ray_for_pixel(cam, real(x), real(y)).direction.norm() ==
            doctest::Approx(1).epsilon(1e-12));
  CHECK_THROWS_AS(ray_for_pixel(cam, -1, 0), InputError);
  CHECK_THROWS_AS(ray_for_pixel(cam, 0, 24), InputError);
}

TEST_CASE("camera validation rejects broken poses and intrinsics") {
  Camera cam = make_lookat_camera({0, -2, 0}, {0, 0, 0}, {0, 0, 1}, 50, 50, 8, 8);
  CHECK(cam.pose.is_rigid());
  cam.fx = -1;
  CHECK_THROWS_AS(cam.validate(), InputError);
  cam.fx = 50;
  cam.pose.rotation.m[0] = 2;
  CHECK_THROWS_AS(cam.validate(), InputError);
}

TEST_CASE("area-weighted sampling stays on a single triangle") {
  TriangleMesh tri;
  tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  tri.faces = {{0, 1, 2}};
  const auto pts = sample_points_on_mesh(tri, 1000, 7);
  for (const Vec3& p : pts) {
    CHECK(p.z == 0);                       // on the triangle plane
    CHECK(p.x >= 0);
    CHECK(p.y >= 0);
    CHECK(p.x + p.y <= 1 + 1e-12);         // valid barycentric region
  }
}

TEST_CASE("triangle areas weight the sampling 3:1 within binomial bounds") {
  TriangleMesh mesh;
  mesh.vertices = {{0, 0, 0}, {3, 0, 0}, {0, 2, 0},            // area 3
                   {10, 0, 0}, {11, 0, 0}, {10, 2, 0}};        // area 1
  mesh.faces = {{0, 1, 2}, {3, 4, 5}};
  const int n = 100000;
  const auto pts = sample_points_on_mesh(mesh, n, 99);
  int big = 0;
  for (const Vec3& p : pts) big += p.x < 5 ? 1 : 0;
  const real expectation = 0.75 * n;
  const real sigma = std::sqrt(n * 0.75 * 0.25);
  CHECK(std::abs(big - expectation) < 3 * sigma);
}

TEST_CASE("cube surface samples average to the cube center") {
  const TriangleMesh cube = testing::make_box_mesh({0.2, -0.1, 0.4}, {0.5, 0.5, 0.5});
  const auto pts = sample_points_on_mesh(cube, 100000, 3);
  Vec3 mean{0, 0, 0};
  for (const Vec3& p : pts) mean += p;
  mean = mean / real(pts.size());
  CHECK(std::abs(mean.x - 0.2) < 0.01);
  CHECK(std::abs(mean.y + 0.1) < 0.01);
  CHECK(std::abs(mean.z - 0.4) < 0.01);
}

TEST_CASE("mesh sampling is reproducible and validates input") {
  const TriangleMesh cube = testing::make_box_mesh({0, 0, 0}, {1, 1, 1});
  const auto a = sample_points_on_mesh(cube, 500, 42);
  const auto b = sample_points_on_mesh(cube, 500, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  TriangleMesh degenerate;
  degenerate.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  degenerate.faces = {{0, 1, 2}};
  CHECK_THROWS_AS(sample_points_on_mesh(degenerate, 10, 1), InputError);
  CHECK_THROWS_AS(sample_points_on_mesh(cube, 0, 1), InputError);
}

TEST_CASE("unit sphere normalization recovers scale and round-trips") {
  TriangleMesh mesh = testing::make_box_mesh({0, 0, 0}, {0.5, 0.5, 0.5});
  // max |v| is sqrt(3)/2; scale a copy by 5 and check 1/5 recovery
  TriangleMesh scaled = mesh;
  for (Vec3& v : scaled.vertices) v = v * 5;
  const auto base = normalize_to_unit_sphere(mesh);
  const auto big = normalize_to_unit_sphere(scaled);
  CHECK(big.scale == doctest::Approx(base.scale / 5).epsilon(1e-12));

  // applying (scale, center) to the input reproduces the output
  TriangleMesh arbitrary;
  arbitrary.vertices = {{0.3, 1.2, -4}, {2, 0.5, 0.1}, {-1, 2, 3}, {0.5, -0.5, 1}};
  arbitrary.faces = {{0, 1, 2}, {0, 2, 3}};
  const auto norm = normalize_to_unit_sphere(arbitrary);
  real max_radius = 0;
  for (std::size_t i = 0; i < arbitrary.vertices.size(); ++i) {
    const Vec3 mapped = (arbitrary.vertices[i] - norm.center) * norm.scale;
    CHECK((mapped - norm.mesh.vertices[i]).norm() < 1e-12);
    max_radius = std::max(max_radius, mapped.norm());
  }
  CHECK(max_radius == doctest::Approx(1).epsilon(1e-12));

  // idempotent within 1e-12
  const auto again = normalize_to_unit_sphere(norm.mesh);
  CHECK(std::abs(again.scale - 1) < 1e-12);
  for (std::size_t i = 0; i < norm.mesh.vertices.size(); ++i)
    CHECK((again.mesh.vertices[i] - norm.mesh.vertices[i]).norm() < 1e-12);
}

TEST_CASE("already-normalized input maps to itself") {
  TriangleMesh mesh;
  mesh.vertices = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  mesh.faces = {{0, 2, 1}, {0, 1, 3}};
  const auto out = normalize_to_unit_sphere(mesh);
  CHECK(out.scale == doctest::Approx(1).epsilon(1e-12));
  CHECK(out.center.norm() < 1e-12);
}

TEST_CASE("mesh validation catches bad faces") {
  TriangleMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  mesh.faces = {{0, 1, 2}};
  CHECK_NOTHROW(validate_mesh(mesh));
  mesh.faces = {{0, 1, 3}};
  CHECK_THROWS_AS(validate_mesh(mesh), InputError);
  mesh.faces = {{0, 1, 1}};
  CHECK_THROWS_AS(validate_mesh(mesh), InputError);
}

TEST_CASE("ray-box intersection clips to the segment in front of the origin") {
  const Aabb box;
  const Ray hit = make_ray({0, 0, -3}, {0, 0, 1});
  auto span = intersect_aabb(hit, box);
  REQUIRE(span.has_value());
  CHECK(span->first == doctest::Approx(2));
  CHECK(span->second == doctest::Approx(4));

  const Ray miss = make_ray({0, 5, -3}, {0, 0, 1});
  CHECK_FALSE(intersect_aabb(miss, box).has_value());

  const Ray inside = make_ray({0, 0, 0}, {1, 0, 0});
  span = intersect_aabb(inside, box);
  REQUIRE(span.has_value());
  CHECK(span->first == 0);
  CHECK(span->second == doctest::Approx(1));
}

TEST_CASE("closed meshes have no boundary edges and Euler characteristic 2") {
  const TriangleMesh cube = testing::make_box_mesh({0, 0, 0}, {1, 1, 1});
  CHECK(boundary_edge_count(cube) == 0);
  CHECK(euler_characteristic(cube) == 2);
  CHECK(signed_volume(cube) == doctest::Approx(8).epsilon(1e-12));
}

TEST_SUITE_END();
