#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "trisdf/fitting.hpp"
#include "trisdf/rng.hpp"
#include "trisdf/synth.hpp"

using namespace trisdf;

TEST_SUITE_BEGIN("fitting");

namespace {

FitConfig tiny_config() {
  FitConfig cfg;
  cfg.total_iters = 40;
  cfg.warmup_iters = 10;
  cfg.rays_per_iter = 8;
  cfg.triplane_resolution = 8;
  cfg.triplane_channels = 4;
  cfg.pe_levels = 2;
  cfg.hidden = 16;
  cfg.sampler = {.n_uniform = 8, .n_importance = 8, .t_near = 0.6, .t_far = 4.2};
  cfg.init_iters = 40;
  cfg.init_points = 64;
  cfg.log_every = 10;
  return cfg;
}

MultiViewDataset tiny_dataset(int views = 2, int size = 6) {
  const AnalyticField field(AnalyticSdf::sphere({0, 0, 0}, 0.5), Shading::Lambert);
  OrbitSpec orbit{.count = views, .radius = 2.5, .elevation_deg = 15, .fov_deg = 30};
  SamplerConfig sampler{.n_uniform = 16, .n_importance = 16, .t_near = 0.5, .t_far = 4.5};
  MultiViewDataset dataset;
  for (int i = 0; i < views; ++i) {
    const Camera cam = orbit_camera(orbit, i, size, size);
    dataset.cameras.push_back(cam);
    dataset.images.push_back(
        render_frame(field, 0.01, Aabb{}, cam, sampler, dataset.background, 100 + i));
  }
  return dataset;
}

}  // namespace

TEST_CASE("schedule switches beta and lambda exactly at the warmup boundary") {
  FitConfig cfg = tiny_config();
  cfg.total_iters = 200;
  cfg.warmup_iters = 100;
  for (int iter = 0; iter < 200; ++iter) {
    const ScheduleState s = schedule(iter, cfg);
    if (iter < 100) {
      CHECK_FALSE(s.beta_learnable);
      CHECK(s.lambda == 0.0);
    } else {
      CHECK(s.beta_learnable);
      CHECK(s.lambda == 0.1);
    }
  }
  cfg.warmup_iters = 0;  // degenerate warmup: learnable from the start
  CHECK(schedule(0, cfg).beta_learnable);
  CHECK(schedule(0, cfg).lambda == 0.1);
  CHECK_THROWS_AS(schedule(200, cfg), ContractError);
  CHECK_THROWS_AS(schedule(-1, cfg), ContractError);
}

TEST_CASE("sphere pretraining shapes the distance head") {
  FitConfig cfg = tiny_config();
  cfg.init_iters = 400;
  cfg.init_points = 256;
  FitState state = init_fit(cfg);
  Rng rng(55);
  real err = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const Vec3 p{real(rng.uniform(-1, 1)), real(rng.uniform(-1, 1)), real(rng.uniform(-1, 1))};
    const LearnedField field(state.params, state.net, state.grid, state.encoder);
    const real want = cfg.init_sphere_radius - p.norm();
    err += (field.sdf(p) - want) * (field.sdf(p) - want);
  }
  CHECK(std::sqrt(err / n) < 0.05);
}

TEST_CASE("beta stays bit-identical with zero gradient through the warmup") {
  FitConfig cfg = tiny_config();
  const MultiViewDataset dataset = tiny_dataset();
  FitState state = init_fit(cfg);
  for (int it = 0; it < 10; ++it) {
    const LossRow row = fit_step(state, dataset, cfg);
    CHECK(row.beta == cfg.beta_init);
    CHECK(row.lambda == 0.0);
    CHECK(state.params.grad(state.density.raw_param())[0] == 0.0);
    CHECK(state.density.beta(state.params) == cfg.beta_init);
  }
  // crossing the boundary unlocks beta and the constraint weight
  for (int it = 10; it < 12; ++it) {
    const LossRow row = fit_step(state, dataset, cfg);
    CHECK(row.lambda == 0.1);
  }
  CHECK(state.density.learnable());
}

TEST_CASE("the constraint term contributes nothing while lambda is zero") {
  FitConfig a = tiny_config();
  FitConfig b = tiny_config();
  b.lambda_final = 0.7;  // differs only after warmup
  const MultiViewDataset dataset = tiny_dataset();
  FitState sa = init_fit(a);
  FitState sb = init_fit(b);
  for (int it = 0; it < 5; ++it) {
    fit_step(sa, dataset, a);
    fit_step(sb, dataset, b);
  }
  for (int p = 0; p < sa.params.count(); ++p) {
    auto va = sa.params.value(p);
    auto vb = sb.params.value(p);
    for (std::size_t i = 0; i < va.size(); ++i) CHECK(va[i] == vb[i]);
  }
}

TEST_CASE("a perfectly fit dataset is a fixed point of the optimizer") {
  FitConfig cfg = tiny_config();
  cfg.sampler.jitter = false;
  cfg.sampler.n_importance = 0;  // deterministic sample positions
  cfg.rays_per_iter = 16;
  FitState state = init_fit(cfg);

  // targets rendered from the current model through the same sampler
  MultiViewDataset dataset = tiny_dataset();
  const LearnedField field(state.params, state.net, state.grid, state.encoder);
  for (std::size_t v = 0; v < dataset.images.size(); ++v)
    dataset.images[v] = render_frame(field, state.density.beta(state.params), Aabb{},
                                     dataset.cameras[v], cfg.sampler, dataset.background, 1);

  std::vector<std::vector<real>> before;
  for (int p = 0; p < state.params.count(); ++p)
    before.emplace_back(state.params.value(p).begin(), state.params.value(p).end());
  const LossRow row = fit_step(state, dataset, cfg);
  CHECK(row.l_photo == 0.0);
  for (int p = 0; p < state.params.count(); ++p) {
    auto now = state.params.value(p);
    for (std::size_t i = 0; i < now.size(); ++i) CHECK(now[i] == before[p][i]);
  }
}

TEST_CASE("one step on a random start keeps everything finite") {
  FitConfig cfg = tiny_config();
  const MultiViewDataset dataset = tiny_dataset();
  FitState state = init_fit(cfg);
  const LossRow row = fit_step(state, dataset, cfg);
  CHECK(std::isfinite(row.l_photo));
  CHECK(std::isfinite(row.l_s));
  for (int p = 0; p < state.params.count(); ++p)
    for (real g : state.params.grad(p)) CHECK(std::isfinite(g));
}

TEST_CASE("a small fit drives the photometric loss down an order of magnitude") {
  FitConfig cfg = tiny_config();
  cfg.total_iters = 500;
  cfg.warmup_iters = 125;
  cfg.rays_per_iter = 24;
  cfg.log_every = 25;
  MultiViewDataset dataset = tiny_dataset(2, 8);
  const FitState state = fit_scene(dataset, cfg);
  REQUIRE(state.curve.size() > 4);
  // average the first and last few logged rows to smooth batch noise
  real early = 0, late = 0;
  for (int i = 0; i < 3; ++i) {
    early += state.curve[i].l_photo;
    late += state.curve[state.curve.size() - 1 - i].l_photo;
  }
  CHECK(late < early / 10);
}

TEST_CASE("fits are reproducible end to end") {
  FitConfig cfg = tiny_config();
  const MultiViewDataset dataset = tiny_dataset();
  const FitState a = fit_scene(dataset, cfg);
  const FitState b = fit_scene(dataset, cfg);
  for (int p = 0; p < a.params.count(); ++p) {
    auto va = a.params.value(p);
    auto vb = b.params.value(p);
    for (std::size_t i = 0; i < va.size(); ++i) CHECK(va[i] == vb[i]);
  }
  REQUIRE(a.curve.size() == b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].l_photo == b.curve[i].l_photo);
    CHECK(a.curve[i].l_s == b.curve[i].l_s);
  }
}

TEST_CASE("group count does not change the result") {
  FitConfig a = tiny_config();
  a.grad_groups = 1;
  FitConfig b = tiny_config();
  b.grad_groups = 4;
  // grouping is part of the config, so deterministic reduction means
  // each config reproduces itself; equal results across group counts
  // are not promised (summation order differs), but convergence should
  // match closely
  const MultiViewDataset dataset = tiny_dataset();
  const FitState sa = fit_scene(dataset, a);
  const FitState sb = fit_scene(dataset, b);
  CHECK(std::abs(sa.curve.back().l_photo - sb.curve.back().l_photo) < 1e-6);
}

TEST_CASE("exploding configurations abort with a ray diagnostic") {
  FitConfig cfg = tiny_config();
  cfg.total_iters = 2000;
  cfg.lr_triplane = 1e14;
  cfg.lr_network = 1e14;
  const MultiViewDataset dataset = tiny_dataset();
  FitState state = init_fit(cfg);
  try {
    for (int i = 0; i < 50; ++i) fit_step(state, dataset, cfg);
    // huge rates may still stay finite; nothing to assert in that case
  } catch (const RuntimeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("non-finite") != std::string::npos);
    CHECK(msg.find("origin") != std::string::npos);
  }
}

TEST_CASE("dataset validation rejects mismatched inputs") {
  MultiViewDataset dataset = tiny_dataset();
  dataset.images.pop_back();
  CHECK_THROWS_AS(dataset.validate(), InputError);
  MultiViewDataset empty;
  CHECK_THROWS_AS(empty.validate(), InputError);
}

TEST_SUITE_END();
