#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "trisdf/metrics.hpp"
#include "trisdf/rng.hpp"

using namespace trisdf;

TEST_SUITE_BEGIN("metrics");

namespace {

PointCloud random_cloud(Rng& rng, int n, real span = 1.0) {
  PointCloud cloud(n);
  for (Vec3& p : cloud)
    p = {real(rng.uniform(-span, span)), real(rng.uniform(-span, span)),
         real(rng.uniform(-span, span))};
  return cloud;
}

}  // namespace

TEST_CASE("nearest distances vanish on identical clouds") {
  Rng rng(1);
  const PointCloud cloud = random_cloud(rng, 300);
  for (real d : nn_dists(cloud, cloud)) CHECK(d == 0.0);
}

TEST_CASE("tree queries equal brute force on random instances") {
  Rng rng(77);
  for (int instance = 0; instance < 200; ++instance) {
    const int na = 1 + static_cast<int>(rng.below(500));
    const int nb = 1 + static_cast<int>(rng.below(500));
    const PointCloud a = random_cloud(rng, na);
    const PointCloud b = random_cloud(rng, nb);
    const auto fast = nn_dists(a, b);
    const auto slow = testing::brute_force_nn(a, b);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-12);
  }
}

TEST_CASE("a rigid translation of a sparse cloud shifts every distance") {
  PointCloud a;
  for (int i = 0; i < 20; ++i) a.push_back({real(10 * i), 0, 0});  // far-separated
  PointCloud b = a;
  for (Vec3& p : b) p.x += 0.1;
  for (real d : nn_dists(a, b)) CHECK(d == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("all cloud metrics vanish on identical clouds and are symmetric") {
  Rng rng(3);
  const PointCloud a = random_cloud(rng, 400);
  const PointCloud b = random_cloud(rng, 350);
  CHECK(chamfer(a, a) == 0.0);
  CHECK(mse(a, a) == 0.0);
  CHECK(msd(a, a) == 0.0);
  CHECK(hausdorff(a, a) == 0.0);
  CHECK(chamfer(a, b) == chamfer(b, a));
  CHECK(mse(a, b) == mse(b, a));
  CHECK(msd(a, b) == msd(b, a));
  CHECK(hausdorff(a, b) == hausdorff(b, a));
  CHECK(chamfer(a, b) <= hausdorff(a, b));
}

TEST_CASE("concentric spheres measure their radial gap") {
  const PointCloud inner = testing::sample_sphere_surface({0, 0, 0}, 1.0, 100000, 21);
  const PointCloud outer = testing::sample_sphere_surface({0, 0, 0}, 1.1, 100000, 22);
  CHECK(std::abs(chamfer(inner, outer) - 0.1) < 0.005);
  CHECK(std::abs(hausdorff(inner, outer) - 0.1) < 0.01);
}

TEST_CASE("empty clouds are rejected") {
  const PointCloud empty;
  const PointCloud one{{0, 0, 0}};
  CHECK_THROWS_AS(nn_dists(one, empty), InputError);
  CHECK_THROWS_AS(chamfer(empty, one), InputError);
  CHECK_THROWS_AS(hausdorff(one, empty), InputError);
}

TEST_CASE("matched subsample seeds give zero self-distance") {
  Rng rng(9);
  const PointCloud a = random_cloud(rng, 200);
  CHECK(emd(a, a, 64, 5) == 0.0);
}

TEST_CASE("translation moves the optimal assignment rigidly") {
  Rng rng(10);
  const PointCloud a = random_cloud(rng, 128);
  PointCloud b = a;
  const Vec3 t{0.05, -0.2, 0.11};
  for (Vec3& p : b) p += t;
  CHECK(emd(a, b, 64, 5) == doctest::Approx(t.norm()).epsilon(1e-12));
}

TEST_CASE("assignment solver matches exhaustive search at n = 6") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<real> cost(36);
    for (real& c : cost) c = real(rng.uniform(0, 1));
    const auto match = solve_assignment(cost, 6);
    real total = 0;
    for (int i = 0; i < 6; ++i) total += cost[i * 6 + match[i]];
    CHECK(std::abs(total - testing::min_cost_assignment_exhaustive(cost, 6)) < 1e-9);
  }
}

TEST_CASE("assignment solver matches the flow oracle at n = 64") {
  Rng rng(32);
  std::vector<real> cost(64 * 64);
  for (real& c : cost) c = real(rng.uniform(0, 2));
  const auto match = solve_assignment(cost, 64);
  std::vector<char> used(64, 0);
  real total = 0;
  for (int i = 0; i < 64; ++i) {
    REQUIRE(match[i] >= 0);
    CHECK(!used[match[i]]);  // a permutation
    used[match[i]] = 1;
    total += cost[static_cast<std::size_t>(i) * 64 + match[i]];
  }
  CHECK(std::abs(total - testing::min_cost_assignment_flow(cost, 64)) < 1e-9);
}

TEST_CASE("assignment cost dominates independent nearest neighbors") {
  Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud a = random_cloud(rng, 96);
    const PointCloud b = random_cloud(rng, 96);
    // same subsample size as clouds: the full sets are matched
    const real assignment = emd(a, b, 96, 1);
    CHECK(assignment >= chamfer(a, b) - 1e-12);
  }
}

TEST_CASE("emd validates the subsample size") {
  Rng rng(4);
  const PointCloud small = random_cloud(rng, 10);
  CHECK_THROWS_AS(emd(small, small, 11, 1), InputError);
}

TEST_CASE("mesh evaluation of a mesh against itself is identically zero") {
  const TriangleMesh cube = testing::make_box_mesh({0, 0, 0}, {0.4, 0.3, 0.5});
  const MetricReport report = evaluate_meshes(cube, cube, 2000, 3, 17, 256);
  CHECK(report.chamfer.mean == 0.0);
  CHECK(report.chamfer.stddev == 0.0);
  CHECK(report.mse.mean == 0.0);
  CHECK(report.hausdorff.mean == 0.0);
  CHECK(report.emd.mean == 0.0);
  CHECK(report.msd.mean == 0.0);
}

TEST_CASE("mesh evaluation is deterministic for a fixed seed") {
  const TriangleMesh a = testing::make_box_mesh({0, 0, 0}, {0.5, 0.5, 0.5});
  const TriangleMesh b = testing::make_box_mesh({0.02, 0, 0}, {0.5, 0.48, 0.5});
  const MetricReport r1 = evaluate_meshes(a, b, 1000, 4, 23, 128);
  const MetricReport r2 = evaluate_meshes(a, b, 1000, 4, 23, 128);
  CHECK(r1.chamfer.mean == r2.chamfer.mean);
  CHECK(r1.emd.mean == r2.emd.mean);
  CHECK(r1.hausdorff.stddev == r2.hausdorff.stddev);
  CHECK(r1.chamfer.mean > 0.0);
}

TEST_SUITE_END();
