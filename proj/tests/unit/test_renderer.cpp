#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "trisdf/renderer.hpp"
#include "trisdf/rng.hpp"

using namespace trisdf;

TEST_SUITE_BEGIN("renderer");

namespace {

// small learned model for differentiable-path tests
struct TinyModel {
  ad::ParamStore store;
  TriplaneGrid grid;
  PositionalEncoder enc{2};
  SdfColorNetwork net;
  LaplaceDensity density;

  explicit TinyModel(std::uint64_t seed, int res = 8, int channels = 4, int hidden = 64) {
    grid = TriplaneGrid::create(store, res, channels, Aabb{});
    net = SdfColorNetwork::create(store, grid.feature_dim() + enc.dim_per_point(), hidden,
                                  seed);
    density = LaplaceDensity::create(store, 0.1);
    Rng rng(seed);
    for (int pid : {grid.plane_xy, grid.plane_xz, grid.plane_yz})
      for (real& v : store.value(pid)) v = real(rng.uniform(-0.05, 0.05));
  }
};

}  // namespace

TEST_CASE("stratified sampling without jitter hits bin centers") {
  const auto ts = stratified_sample(0.0, 1.0, 4, false, 1);
  REQUIRE(ts.size() == 4);
  CHECK(ts[0] == 0.125);
  CHECK(ts[1] == 0.375);
  CHECK(ts[2] == 0.625);
  CHECK(ts[3] == 0.875);
}

TEST_CASE("jittered samples stay inside their bins") {
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    const auto ts = stratified_sample(2.0, 5.0, 16, true, seed);
    for (int i = 0; i < 16; ++i) {
      const real lo = 2.0 + 3.0 * i / 16.0;
      const real hi = 2.0 + 3.0 * (i + 1) / 16.0;
      CHECK(ts[i] >= lo);
      CHECK(ts[i] < hi);
    }
  }
}

TEST_CASE("pooled stratified draws are uniform by KS distance") {
  std::vector<real> pooled;
  pooled.reserve(100000);
  for (int seed = 0; seed < 100000 / 20; ++seed) {
    const auto ts = stratified_sample(2.0, 5.0, 20, true, seed);
    pooled.insert(pooled.end(), ts.begin(), ts.end());
  }
  CHECK(testing::ks_statistic_uniform(pooled, 2.0, 5.0) < 0.01);
}

TEST_CASE("importance sampling concentrates on the heavy bin") {
  const std::vector<real> bins{0.0, 0.5, 1.0};
  const std::vector<real> weights{0.0, 1.0};
  const auto ts = importance_sample(bins, weights, 1000, 7);
  for (real t : ts) {
    CHECK(t >= 0.5);
    CHECK(t <= 1.0);
  }
}

TEST_CASE("equal importance weights reduce to the uniform law") {
  std::vector<real> bins(21);
  for (int i = 0; i <= 20; ++i) bins[i] = 1.0 + 2.0 * i / 20.0;
  const std::vector<real> weights(20, 0.7);
  std::vector<real> pooled;
  for (int seed = 0; seed < 100; ++seed) {
    const auto ts = importance_sample(bins, weights, 1000, seed);
    pooled.insert(pooled.end(), ts.begin(), ts.end());
  }
  CHECK(testing::ks_statistic_uniform(pooled, 1.0, 3.0) < 0.01);
}

TEST_CASE("zero weights degrade to uniform through the floor") {
  const std::vector<real> bins{0.0, 1.0, 2.0};
  const std::vector<real> weights{0.0, 0.0};
  const auto ts = importance_sample(bins, weights, 4000, 3);
  int low = 0;
  for (real t : ts) low += t < 1.0 ? 1 : 0;
  CHECK(std::abs(low - 2000) < 3 * std::sqrt(4000 * 0.25));
}

TEST_CASE("a 1:3 weight split lands three quarters of samples in the heavy bin") {
  const std::vector<real> bins{0.0, 1.0, 2.0};
  const std::vector<real> weights{1.0, 3.0};
  const int n = 100000;
  const auto ts = importance_sample(bins, weights, n, 11);
  int heavy = 0;
  for (real t : ts) heavy += t >= 1.0 ? 1 : 0;
  const real sigma = std::sqrt(n * 0.75 * 0.25);
  CHECK(std::abs(heavy - 0.75 * n) < 3 * sigma);
}

TEST_CASE("opaque single sample absorbs the whole ray") {
  const std::vector<real> sigmas{1e9};
  const std::vector<Rgb> colors{{0.2, 0.4, 0.8}};
  const std::vector<real> ts{1.5};
  const RenderOutput out = composite(sigmas, colors, ts, 2.5);
  CHECK(out.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.color[2] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(out.depth == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(out.final_transmittance < 1e-12);
}

TEST_CASE("vacuum renders black with unit transmittance") {
  const std::vector<real> sigmas{0, 0, 0};
  const std::vector<Rgb> colors{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
  const std::vector<real> ts{0.2, 0.5, 0.9};
  const RenderOutput out = composite(sigmas, colors, ts, 1.0);
  CHECK(out.color[0] == 0.0);
  CHECK(out.depth == 0.0);
  CHECK(out.final_transmittance == 1.0);
  CHECK(out.weight_sum() == 0.0);
}

TEST_CASE("composite rejects invalid inputs") {
  const std::vector<Rgb> colors{{1, 1, 1}};
  CHECK_THROWS_AS(composite(std::vector<real>{-1.0}, colors, std::vector<real>{0.5}, 1.0),
                  ContractError);
  CHECK_THROWS_AS(composite(std::vector<real>{1.0, 1.0},
                            std::vector<Rgb>{{1, 1, 1}, {1, 1, 1}},
                            std::vector<real>{0.5, 0.5}, 1.0),
                  ContractError);
}

TEST_CASE("quadrature converges to the dense oracle on smooth profiles") {
  const auto sigma_fn = [](real) { return real(2.0); };
  const auto color_fn = [](real t) { return Rgb{0.9, 0.5 + 0.3 * std::sin(t), 0.2}; };
  const auto oracle = testing::dense_quadrature(sigma_fn, color_fn, 0.0, 1.0, 4096);

  const auto run = [&](int n) {
    const auto ts = stratified_sample(0.0, 1.0, n, false, 0);
    std::vector<real> sigmas(ts.size());
    std::vector<Rgb> colors(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      sigmas[i] = sigma_fn(ts[i]);
      colors[i] = color_fn(ts[i]);
    }
    return composite(sigmas, colors, ts, 1.0);
  };

  const RenderOutput r16 = run(16);
  const RenderOutput r256 = run(256);
  CHECK(std::abs(r16.color[1] - oracle.color[1]) < 2e-2);
  CHECK(std::abs(r16.depth - oracle.depth) < 2e-2);
  CHECK(std::abs(r256.color[1] - oracle.color[1]) < 1e-3);
  CHECK(std::abs(r256.depth - oracle.depth) < 1e-3);

  // error shrinks monotonically through 16 -> 64 -> 256
  const RenderOutput r64 = run(64);
  const real e16 = std::abs(r16.depth - oracle.depth);
  const real e64 = std::abs(r64.depth - oracle.depth);
  const real e256 = std::abs(r256.depth - oracle.depth);
  CHECK(e64 <= e16);
  CHECK(e256 <= e64);
}

TEST_CASE("weights and final transmittance always sum to one") {
  Rng rng(88);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(30));
    std::vector<real> ts(m), sigmas(m);
    std::vector<Rgb> colors(m);
    real t = real(rng.uniform(0.01, 0.2));
    for (int i = 0; i < m; ++i) {
      ts[i] = t;
      t += real(rng.uniform(0.01, 0.3));
      sigmas[i] = real(rng.uniform(0, 20));
      colors[i] = {real(rng.uniform()), real(rng.uniform()), real(rng.uniform())};
    }
    const RenderOutput out = composite(sigmas, colors, ts, t);
    CHECK(std::abs(out.weight_sum() + out.final_transmittance - 1.0) < 1e-6);
    for (real w : out.weights) CHECK(w >= 0.0);
  }
}

TEST_CASE("sphere depth matches the analytic intersection") {
  const AnalyticField field(AnalyticSdf::sphere({0, 0, 0}, 0.5), Shading::Flat);
  SamplerConfig cfg{.n_uniform = 64, .n_importance = 64, .t_near = 0.5, .t_far = 4.5};
  const Ray ray = make_ray({0, -2.5, 0}, {0, 1, 0});
  const RenderOutput out = render_ray(field, 0.01, Aabb{}, ray, cfg, 5);
  CHECK(std::abs(out.depth - 2.0) < 1e-2);  // camera at 2.5, surface at radius 0.5
  CHECK(out.final_transmittance < 1e-6);
}

TEST_CASE("a ray through empty ambient space keeps the closed-form transmittance") {
  // constant signed distance -0.8 everywhere: homogeneous density
  const testing::ConstantField field(-0.8, {1, 1, 1});
  const real beta = 0.1;
  SamplerConfig cfg{.n_uniform = 64, .n_importance = 0, .t_near = 0.5, .t_far = 4.0};
  const Ray ray = make_ray({0, 0, -2}, {0, 0, 1});
  // segment across the box: z in [-1, 1] -> t in [1, 3]; for constant
  // density the quadrature is exact from the first sample to t_far
  const RenderOutput out = render_ray(field, beta, Aabb{}, ray, cfg, 9);
  const real sigma = sdf_to_density(-0.8, beta);
  REQUIRE_FALSE(out.t_values.empty());
  CHECK(out.t_values.front() >= 1.0);
  CHECK(out.t_values.front() <= 1.0 + 2.0 / 64);  // inside the first bin
  const real expect = std::exp(-sigma * (3.0 - out.t_values.front()));
  CHECK(out.final_transmittance == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("rays missing the extent render background") {
  const AnalyticField field(AnalyticSdf::sphere({0, 0, 0}, 0.5), Shading::Flat);
  SamplerConfig cfg{.n_uniform = 8, .n_importance = 0, .t_near = 0.1, .t_far = 10};
  const Ray ray = make_ray({0, 5, -3}, {0, 0, 1});
  const RenderOutput out = render_ray(field, 0.01, Aabb{}, ray, cfg, 1);
  CHECK(out.final_transmittance == 1.0);
  CHECK(out.weights.empty());
  CHECK(out.color[0] == 0.0);
}

TEST_CASE("renders are bit-identical for a fixed seed") {
  const AnalyticField field(AnalyticSdf::sphere({0.1, 0, 0}, 0.4), Shading::Lambert);
  SamplerConfig cfg{.n_uniform = 24, .n_importance = 24, .t_near = 0.4, .t_far = 5};
  const Ray ray = make_ray({0, -2.5, 0.2}, Vec3{0.05, 1, -0.1}.normalized());
  const RenderOutput a = render_ray(field, 0.02, Aabb{}, ray, cfg, 321);
  const RenderOutput b = render_ray(field, 0.02, Aabb{}, ray, cfg, 321);
  CHECK(a.depth == b.depth);
  CHECK(a.color[0] == b.color[0]);
  REQUIRE(a.t_values.size() == b.t_values.size());
  for (std::size_t i = 0; i < a.t_values.size(); ++i) CHECK(a.t_values[i] == b.t_values[i]);
  const RenderOutput c = render_ray(field, 0.02, Aabb{}, ray, cfg, 322);
  CHECK(a.depth != c.depth);  // different jitter
}

TEST_CASE("surface points evaluate the ray exactly") {
  const Ray ray = make_ray({0.3, -1.2, 0.5}, Vec3{0.2, 0.9, -0.1}.normalized());
  CHECK(surface_point(ray, 0).x == ray.origin.x);
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const real d = real(rng.uniform(0, 10));
    const Vec3 p = surface_point(ray, d);
    CHECK(std::abs(p.x - (ray.origin.x + d * ray.direction.x)) < 1e-15);
    CHECK(std::abs(p.y - (ray.origin.y + d * ray.direction.y)) < 1e-15);
    CHECK(std::abs(p.z - (ray.origin.z + d * ray.direction.z)) < 1e-15);
  }
  CHECK_THROWS_AS(surface_point(ray, -1.0), ContractError);
}

TEST_CASE("depth-consistency loss is zero on the level set and tracks offsets") {
  const AnalyticField field(AnalyticSdf::sphere({0, 0, 0}, 0.5), Shading::Flat);
  Rng rng(77);
  std::vector<Ray> rays;
  std::vector<real> on_surface, offset;
  for (int i = 0; i < 64; ++i) {
    Vec3 dir{real(rng.normal()), real(rng.normal()), real(rng.normal())};
    dir = dir.normalized();
    const Vec3 origin = dir * real(-2.0);  // looking at the sphere center
    rays.push_back(make_ray(origin, dir));
    on_surface.push_back(1.5);        // |origin| - radius
    offset.push_back(1.55);           // surface point at |p| = 0.45 -> s = +0.05
  }
  CHECK(sdf_depth_loss(field, rays, on_surface) < 1e-9);
  CHECK(sdf_depth_loss(field, rays, offset) == doctest::Approx(0.05).epsilon(1e-9));

  // straight-line recomputation oracle
  real acc = 0;
  for (std::size_t i = 0; i < rays.size(); ++i)
    acc += std::abs(field.sdf(rays[i].origin + rays[i].direction * offset[i]));
  CHECK(std::abs(sdf_depth_loss(field, rays, offset) - acc / rays.size()) < 1e-12);

  CHECK_THROWS_AS(sdf_depth_loss(field, {}, {}), InputError);
}

TEST_CASE("taped render equals the plain render on learned fields") {
  TinyModel model(61, 8, 4, 16);
  const LearnedField field(model.store, model.net, model.grid, model.enc);
  SamplerConfig cfg{.n_uniform = 12, .n_importance = 12, .t_near = 0.6, .t_far = 4.2};
  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    Vec3 dir{real(rng.normal()), real(rng.normal()), real(rng.normal())};
    dir = dir.normalized();
    const Ray ray = make_ray(dir * real(-2.2), dir);
    const std::uint64_t seed = rng.next_u64();
    const RenderOutput plain =
        render_ray(field, model.density.beta(model.store), model.grid.extent, ray, cfg, seed);
    ad::Tape tape(model.store);
    const RayRenderNodes taped =
        render_ray_nodes(tape, model.store, model.net, model.grid, model.enc, model.density,
                         ray, cfg, seed);
    CHECK(tape.scalar(taped.depth) == doctest::Approx(plain.depth).epsilon(1e-13));
    const auto color = tape.value(taped.color);
    for (int c = 0; c < 3; ++c)
      CHECK(color[c] == doctest::Approx(plain.color[c]).epsilon(1e-13));
    CHECK(tape.scalar(taped.transmittance) ==
          doctest::Approx(plain.final_transmittance).epsilon(1e-13));
  }
}

TEST_CASE("per-ray loss gradients pass the finite-difference gate") {
  TinyModel model(13);
  SamplerConfig cfg{.n_uniform = 8, .n_importance = 8, .t_near = 0.6, .t_far = 4.2};
  const Ray ray = make_ray({0, -2.2, 0.15}, Vec3{0.02, 1, -0.04}.normalized());
  const Rgb target{0.6, 0.3, 0.9};

  model.density.make_learnable(model.store);
  // pin the sample set: placement is detached from the graph, so the
  // finite-difference side must integrate the same points
  const LearnedField field(model.store, model.net, model.grid, model.enc);
  const std::vector<real> ts =
      render_ray(field, model.density.beta(model.store), model.grid.extent, ray, cfg, 17)
          .t_values;

  const auto build = [&](ad::Tape& t) {
    const RayRenderNodes render = render_ray_nodes(
        t, model.store, model.net, model.grid, model.enc, model.density, ray, cfg, 17, &ts);
    ad::Var diff = t.sub(render.color, t.constant(target));
    ad::Var photo = t.mul_const(t.dot(diff, diff), real(1) / 3);
    ad::Var s_at = sdf_at_depth_node(t, model.net, model.grid, model.enc, ray, render.depth);
    return t.add(photo, t.mul_const(t.abs(s_at), real(0.1)));
  };
  CHECK(ad::grad_check(build, model.store, 1e-5) < 1e-4);
}

TEST_SUITE_END();
