#include <doctest.h>

#include <cmath>

#include "trisdf/encoding.hpp"
#include "trisdf/rng.hpp"

using namespace trisdf;

TEST_SUITE_BEGIN("encoding");

namespace {

TriplaneGrid make_grid(ad::ParamStore& store, int res, int channels, std::uint64_t seed) {
  TriplaneGrid grid = TriplaneGrid::create(store, res, channels, Aabb{});
  Rng rng(seed);
  for (int pid : {grid.plane_xy, grid.plane_xz, grid.plane_yz})
    for (real& v : store.value(pid)) v = real(rng.uniform(-1, 1));
  return grid;
}

}  // namespace

TEST_CASE("frequency embedding of zero") {
  const auto out = positional_encode(0.0, 2);
  REQUIRE(out.size() == 5);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);   // sin 0
  CHECK(out[2] == 1.0);   // cos 0
  CHECK(out[3] == 0.0);   // sin 0
  CHECK(out[4] == 1.0);
}

TEST_CASE("frequency embedding at the quarter period") {
  const auto out = positional_encode(0.5, 1);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == 0.5);
  CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-15));   // sin(pi/2)
  CHECK(std::abs(out[2]) < 1e-15);                        // cos(pi/2)
}

TEST_CASE("frequency embedding matches a high-precision direct evaluation") {
  const real a = 0.3;
  const int levels = 4;
  const auto out = positional_encode(a, levels);
  REQUIRE(static_cast<int>(out.size()) == 1 + 2 * levels);
  CHECK(out[0] == a);
  for (int k = 0; k < levels; ++k) {
    const long double freq = std::pow(2.0L, k) * 3.14159265358979323846264338327950288L;
    CHECK(std::abs(out[1 + 2 * k] - real(std::sin(freq * (long double)a))) < 1e-14);
    CHECK(std::abs(out[2 + 2 * k] - real(std::cos(freq * (long double)a))) < 1e-14);
  }
}

TEST_CASE("embedding components stay in [-1, 1]") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const real a = real(rng.uniform(-1, 1));
    const int levels = static_cast<int>(rng.below(6));
    const auto out = positional_encode(a, levels);
    for (std::size_t i = 1; i < out.size(); ++i) {
      CHECK(out[i] >= -1.0);
      CHECK(out[i] <= 1.0);
    }
  }
}

TEST_CASE("sampling at a grid node returns the stored features exactly") {
  ad::ParamStore store;
  const TriplaneGrid grid = make_grid(store, 5, 3, 11);
  // node (3, 1) of the xy plane: x = -1 + 2*3/4 = 0.5, y = -1 + 2*1/4 = -0.5
  // plane z projections use z = some node too: z = 0 -> node 2
  const Vec3 p{0.5, -0.5, 0.0};
  const auto out = triplane_sample(store, grid, p);
  auto plane = store.value(grid.plane_xy);
  for (int c = 0; c < 3; ++c)
    CHECK(out[c] == plane[(3 * 5 + 1) * 3 + c]);
  auto plane_xz = store.value(grid.plane_xz);
  for (int c = 0; c < 3; ++c)
    CHECK(out[3 + c] == plane_xz[(3 * 5 + 2) * 3 + c]);
  auto plane_yz = store.value(grid.plane_yz);
  for (int c = 0; c < 3; ++c)
    CHECK(out[6 + c] == plane_yz[(1 * 5 + 2) * 3 + c]);
}

TEST_CASE("constant planes sample to a constant anywhere") {
  ad::ParamStore store;
  TriplaneGrid grid = TriplaneGrid::create(store, 8, 2, Aabb{});
  for (int pid : {grid.plane_xy, grid.plane_xz, grid.plane_yz})
    for (real& v : store.value(pid)) v = 0.625;
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 p{real(rng.uniform(-1, 1)), real(rng.uniform(-1, 1)), real(rng.uniform(-1, 1))};
    for (real v : triplane_sample(store, grid, p))
      CHECK(v == doctest::Approx(0.625).epsilon(1e-15));
  }
}

TEST_CASE("cell-center samples average the four corner features") {
  ad::ParamStore store;
  const TriplaneGrid grid = make_grid(store, 4, 2, 23);
  // center of xy-plane cell (1, 2): u = 1.5, v = 2.5
  // with extent [-1,1] and R=4: u = (x+1)/2*3 -> x = 0, y = 2*2.5/3 - 1
  const real x = 2 * (1.5 / 3) - 1;
  const real y = 2 * (2.5 / 3) - 1;
  const Vec3 p{x, y, -1.0};
  const auto out = triplane_sample(store, grid, p);
  auto plane = store.value(grid.plane_xy);
  for (int c = 0; c < 2; ++c) {
    const real avg = (plane[(1 * 4 + 2) * 2 + c] + plane[(1 * 4 + 3) * 2 + c] +
                      plane[(2 * 4 + 2) * 2 + c] + plane[(2 * 4 + 3) * 2 + c]) /
                     4;
    CHECK(out[c] == doctest::Approx(avg).epsilon(1e-12));
  }
}

TEST_CASE("sampling is continuous across cell boundaries") {
  ad::ParamStore store;
  const TriplaneGrid grid = make_grid(store, 6, 4, 37);
  // shared edge u = 2 between cells 1 and 2 of the xy plane
  const real x = 2 * (2.0 / 5) - 1;
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 p{x, real(rng.uniform(-1, 1)), real(rng.uniform(-1, 1))};
    const Vec3 eps{1e-13, 0, 0};
    const auto lo = triplane_sample(store, grid, p - eps);
    const auto hi = triplane_sample(store, grid, p + eps);
    for (std::size_t i = 0; i < lo.size(); ++i) CHECK(std::abs(lo[i] - hi[i]) < 1e-11);
  }
}

TEST_CASE("out-of-extent samples violate the contract") {
  ad::ParamStore store;
  const TriplaneGrid grid = make_grid(store, 4, 1, 3);
  CHECK_THROWS_AS(triplane_sample(store, grid, Vec3{1.5, 0, 0}), ContractError);
  CHECK_THROWS_AS(triplane_sample(store, grid, Vec3{0, -1.01, 0}), ContractError);
}

TEST_CASE("augmented features concatenate in the documented order") {
  ad::ParamStore store;
  TriplaneGrid grid = TriplaneGrid::create(store, 4, 2, Aabb{});
  const PositionalEncoder enc{1};
  const Vec3 p{0.25, -0.5, 0.75};
  const auto out = augmented_features(store, grid, enc, p);
  REQUIRE(out.size() == 6 + 9);  // 3C + 3(1+2L)
  for (int i = 0; i < 6; ++i) CHECK(out[i] == 0.0);  // planes start zeroed
  const auto pex = positional_encode(p.x, 1);
  const auto pey = positional_encode(p.y, 1);
  const auto pez = positional_encode(p.z, 1);
  for (int i = 0; i < 3; ++i) {
    CHECK(out[6 + i] == pex[i]);
    CHECK(out[9 + i] == pey[i]);
    CHECK(out[12 + i] == pez[i]);
  }
}

TEST_CASE("taped features equal the plain evaluation") {
  ad::ParamStore store;
  const TriplaneGrid grid = make_grid(store, 7, 3, 77);
  const PositionalEncoder enc{3};
  Rng rng(15);
  ad::Tape tape(store);
  for (int trial = 0; trial < 25; ++trial) {
    const Vec3 p{real(rng.uniform(-0.99, 0.99)), real(rng.uniform(-0.99, 0.99)),
                 real(rng.uniform(-0.99, 0.99))};
    tape.clear();
    std::array<ad::Var, 3> pos = {tape.constant(p.x), tape.constant(p.y), tape.constant(p.z)};
    const auto node = augmented_feature_nodes(tape, grid, enc, pos);
    const auto plain = augmented_features(store, grid, enc, p);
    const auto taped = tape.value(node);
    REQUIRE(taped.size() == plain.size());
    for (std::size_t i = 0; i < plain.size(); ++i) CHECK(taped[i] == plain[i]);
  }
}

TEST_CASE("feature gradient with respect to the position matches finite differences") {
  ad::ParamStore store;
  const TriplaneGrid grid = make_grid(store, 6, 2, 51);
  const PositionalEncoder enc{2};
  const int pos_id = store.add("pos", {3}, {0.13, -0.42, 0.57});
  std::vector<real> probe(grid.feature_dim() + enc.dim_per_point());
  Rng rng(3);
  for (real& v : probe) v = real(rng.uniform(-1, 1));

  const auto build = [&](ad::Tape& t) {
    ad::Var p = t.param(pos_id);
    std::array<ad::Var, 3> pos = {t.select(p, 0), t.select(p, 1), t.select(p, 2)};
    ad::Var features = augmented_feature_nodes(t, grid, enc, pos);
    return t.dot(features, t.constant(probe));
  };
  CHECK(ad::grad_check(build, store, 1e-6) < 1e-6);
}

TEST_CASE("plane-sample position derivative is constant inside a cell") {
  ad::ParamStore store;
  TriplaneGrid grid = make_grid(store, 4, 2, 99);
  const int pos_pid = store.add("pos", {3});
  std::vector<real> probe(grid.feature_dim(), 1.0);

  const auto position_gradient = [&](const Vec3& p) {
    auto pos_val = store.value(pos_pid);
    pos_val[0] = p.x;
    pos_val[1] = p.y;
    pos_val[2] = p.z;
    ad::Tape tape(store);
    ad::Var pv = tape.param(pos_pid);
    std::array<ad::Var, 3> pos = {tape.select(pv, 0), tape.select(pv, 1), tape.select(pv, 2)};
    ad::Var out = tape.dot(triplane_sample_nodes(tape, grid, pos), tape.constant(probe));
    ad::GradBuffer sink(store);
    tape.backward(out, sink);
    return Vec3{sink[pos_pid][0], sink[pos_pid][1], sink[pos_pid][2]};
  };

  // bilinear patches are linear along each axis: moving only in x
  // within a cell keeps d/dx constant (it varies with the other
  // coordinates, and jumps across cell boundaries)
  const Vec3 g1 = position_gradient({0.05, 0.11, 0.07});
  const Vec3 g2 = position_gradient({0.21, 0.11, 0.07});
  CHECK(g1.x == doctest::Approx(g2.x).epsilon(1e-9));
  const Vec3 g1y = position_gradient({0.05, 0.24, 0.07});
  CHECK(g1.y == doctest::Approx(g1y.y).epsilon(1e-9));
  // a different cell generically differs
  const Vec3 g3 = position_gradient({0.8, 0.11, 0.07});
  CHECK(std::abs(g1.x - g3.x) > 1e-6);
}

TEST_SUITE_END();
