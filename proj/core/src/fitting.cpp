#include "trisdf/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "trisdf/rng.hpp"

namespace trisdf {

void FitConfig::validate() const {
  if (total_iters < 1) throw InputError("fit: total_iters must be >= 1");
  if (warmup_iters < 0 || warmup_iters > total_iters)
    throw InputError("fit: need 0 <= warmup_iters <= total_iters");
  if (!(lambda_final >= 0)) throw InputError("fit: lambda_final must be >= 0");
  if (!(beta_init > 0)) throw InputError("fit: beta_init must be positive");
  if (!(beta_init >= beta_min) || !(beta_min > 0))
    throw InputError("fit: need beta_init >= beta_min > 0");
  if (rays_per_iter < 1) throw InputError("fit: rays_per_iter must be >= 1");
  if (grad_groups < 1) throw InputError("fit: grad_groups must be >= 1");
  if (triplane_resolution < 2 || triplane_channels < 1 || pe_levels < 0 || hidden < 1)
    throw InputError("fit: invalid model shape");
  sampler.validate();
  extent.validate();
}

ScheduleState schedule(int iter, const FitConfig& cfg) {
  if (iter < 0 || iter >= cfg.total_iters)
    throw ContractError("schedule: iteration out of range");
  if (iter < cfg.warmup_iters) return {false, 0};
  return {true, cfg.lambda_final};
}

void MultiViewDataset::validate() const {
  if (images.empty() || images.size() != cameras.size())
    throw InputError("dataset: need matching non-empty image and camera lists");
  for (const auto& img : images) {
    if (img.width != images[0].width || img.height != images[0].height)
      throw InputError("dataset: all images must share dimensions");
  }
  for (const auto& cam : cameras) cam.validate();
}

void pretrain_sdf_sphere(ad::ParamStore& params, const SdfColorNetwork& net,
                         const TriplaneGrid& grid, const PositionalEncoder& enc,
                         real radius, std::uint64_t seed, int iters, int batch, real lr) {
  std::vector<Vec3> points(batch);
  std::vector<real> targets(batch);
  Rng rng = Rng::stream(seed, 0x696e6974);
  for (int i = 0; i < batch; ++i) {
    Vec3 p{real(rng.uniform(grid.extent.lo.x, grid.extent.hi.x)),
           real(rng.uniform(grid.extent.lo.y, grid.extent.hi.y)),
           real(rng.uniform(grid.extent.lo.z, grid.extent.hi.z))};
    points[i] = p;
    targets[i] = radius - p.norm();  // inside-positive sphere
  }

  ad::AdamOptimizer opt(params);
  opt.set_learning_rate(net.w1_sdf, lr);
  opt.set_learning_rate(net.b1_sdf, lr);
  opt.set_learning_rate(net.w2_sdf, lr);
  opt.set_learning_rate(net.b2_sdf, lr);

  ad::Tape tape(params);
  ad::GradBuffer sink(params);
  for (int it = 0; it < iters; ++it) {
    tape.clear();
    params.zero_grad();
    ad::Var loss = tape.constant(real(0));
    for (int i = 0; i < batch; ++i) {
      std::array<ad::Var, 3> pos = {tape.constant(points[i].x), tape.constant(points[i].y),
                                    tape.constant(points[i].z)};
      ad::Var features = augmented_feature_nodes(tape, grid, enc, pos);
      ad::Var s = sdf_forward_node(tape, net, features);
      ad::Var err = tape.add_const(s, -targets[i]);
      loss = tape.add(loss, tape.mul(err, err));
    }
    loss = tape.mul_const(loss, real(1) / batch);
    tape.backward(loss, sink);
    sink.flush_into(params);
    opt.step(params);
  }
}

FitState init_fit(const FitConfig& cfg) {
  cfg.validate();
  FitState state;
  state.encoder.levels = cfg.pe_levels;
  state.grid = TriplaneGrid::create(state.params, cfg.triplane_resolution,
                                    cfg.triplane_channels, cfg.extent);
  const int input_dim = state.grid.feature_dim() + state.encoder.dim_per_point();
  state.net = SdfColorNetwork::create(state.params, input_dim, cfg.hidden, cfg.seed);
  state.density = LaplaceDensity::create(state.params, cfg.beta_init, cfg.beta_min);

  if (cfg.init_iters > 0)
    pretrain_sdf_sphere(state.params, state.net, state.grid, state.encoder,
                        cfg.init_sphere_radius, cfg.seed, cfg.init_iters, cfg.init_points,
                        real(1e-2));

  state.optimizer = std::make_unique<ad::AdamOptimizer>(state.params);
  auto& opt = *state.optimizer;
  opt.set_learning_rate(state.grid.plane_xy, cfg.lr_triplane);
  opt.set_learning_rate(state.grid.plane_xz, cfg.lr_triplane);
  opt.set_learning_rate(state.grid.plane_yz, cfg.lr_triplane);
  for (int pid : {state.net.w1_sdf, state.net.b1_sdf, state.net.w2_sdf, state.net.b2_sdf,
                  state.net.w1_col, state.net.b1_col, state.net.w2_col, state.net.b2_col})
    opt.set_learning_rate(pid, cfg.lr_network);
  // beta stays frozen (rate 0) until the schedule unlocks it
  opt.set_learning_rate(state.density.raw_param(), 0);
  return state;
}

namespace {

struct RayTarget {
  Ray ray;
  Rgb target;
  std::uint64_t seed;
};

struct GroupResult {
  ad::GradBuffer grads;
  real l_photo = 0;
  real l_s = 0;
  int bad_ray = -1;  // batch index of a ray that produced a non-finite loss
};

void process_group(const FitState& state, const FitConfig& cfg, const ScheduleState& sched,
                   const Rgb& background, std::span<const RayTarget> rays, int first_index,
                   GroupResult& result) {
  ad::Tape tape(state.params);
  const real photo_scale = real(1) / (3 * real(cfg.rays_per_iter));
  const real ls_scale = sched.lambda / real(cfg.rays_per_iter);
  const bool has_background =
      background[0] != 0 || background[1] != 0 || background[2] != 0;

  for (std::size_t k = 0; k < rays.size(); ++k) {
    const RayTarget& rt = rays[k];
    tape.clear();
    RayRenderNodes render =
        render_ray_nodes(tape, state.params, state.net, state.grid, state.encoder,
                         state.density, rt.ray, cfg.sampler, rt.seed);
    ad::Var color = render.color;
    if (has_background)
      color = tape.add(color, tape.scale(render.transmittance, tape.constant(background)));
    ad::Var diff = tape.sub(color, tape.constant(rt.target));
    ad::Var photo = tape.dot(diff, diff);
    ad::Var loss = tape.mul_const(photo, photo_scale);

    real ray_ls = 0;
    if (render.hit) {
      if (sched.lambda > 0) {
        ad::Var depth = cfg.detach_depth_in_sdf_loss
                            ? tape.constant(tape.scalar(render.depth))
                            : render.depth;
        ad::Var s_at = sdf_at_depth_node(tape, state.net, state.grid, state.encoder,
                                         rt.ray, depth);
        ad::Var ls = tape.abs(s_at);
        ray_ls = tape.scalar(ls);
        loss = tape.add(loss, tape.mul_const(ls, ls_scale));
      } else {
        // logged but not part of the objective while lambda = 0
        LearnedField field(state.params, state.net, state.grid, state.encoder);
        ray_ls = std::abs(field.sdf(surface_point(rt.ray, tape.scalar(render.depth))));
      }
    }

    const real photo_val = tape.scalar(photo) / 3;
    if (!std::isfinite(photo_val) || !std::isfinite(ray_ls)) {
      result.bad_ray = first_index + static_cast<int>(k);
      return;
    }
    result.l_photo += photo_val;
    result.l_s += ray_ls;
    tape.backward(loss, result.grads);
  }
}

}  // namespace

LossRow fit_step(FitState& state, const MultiViewDataset& dataset, const FitConfig& cfg) {
  const ScheduleState sched = schedule(state.iteration, cfg);
  if (sched.beta_learnable && !state.density.learnable()) {
    state.density.make_learnable(state.params);
    state.optimizer->set_learning_rate(state.density.raw_param(), cfg.lr_beta);
  }

  const int w = dataset.images[0].width;
  const int h = dataset.images[0].height;
  std::vector<RayTarget> batch(cfg.rays_per_iter);
  for (int k = 0; k < cfg.rays_per_iter; ++k) {
    Rng rng = Rng::stream(cfg.seed, 0x72617973 + std::uint64_t(state.iteration),
                          std::uint64_t(k));
    const std::size_t view = rng.below(dataset.cameras.size());
    const int px = static_cast<int>(rng.below(w));
    const int py = static_cast<int>(rng.below(h));
    batch[k].ray = ray_for_pixel(dataset.cameras[view], real(px), real(py));
    const real* pix = dataset.images[view].at(px, py);
    batch[k].target = {pix[0], pix[1], pix[2]};
    batch[k].seed = Rng::stream(cfg.seed, 0x73656564 + std::uint64_t(state.iteration),
                                std::uint64_t(k))
                        .next_u64();
  }

  // fixed contiguous groups; merge order is group order, independent of
  // how many threads actually run
  const int groups = std::min(cfg.grad_groups, cfg.rays_per_iter);
  std::vector<GroupResult> results;
  results.reserve(groups);
  for (int g = 0; g < groups; ++g) results.push_back({ad::GradBuffer(state.params), 0, 0, -1});

  auto group_range = [&](int g) {
    const int per = cfg.rays_per_iter / groups;
    const int extra = cfg.rays_per_iter % groups;
    const int begin = g * per + std::min(g, extra);
    const int end = begin + per + (g < extra ? 1 : 0);
    return std::pair<int, int>{begin, end};
  };

  const int n_threads = std::max(1, std::min(cfg.threads, groups));
  if (n_threads <= 1) {
    for (int g = 0; g < groups; ++g) {
      auto [b, e] = group_range(g);
      process_group(state, cfg, sched, dataset.background,
                    std::span(batch).subspan(b, e - b), b, results[g]);
    }
  } else {
    std::vector<std::thread> workers;
    for (int t = 0; t < n_threads; ++t) {
      workers.emplace_back([&, t]() {
        for (int g = t; g < groups; g += n_threads) {
          auto [b, e] = group_range(g);
          process_group(state, cfg, sched, dataset.background,
                        std::span(batch).subspan(b, e - b), b, results[g]);
        }
      });
    }
    for (auto& th : workers) th.join();
  }

  LossRow row;
  row.iter = state.iteration;
  row.lambda = sched.lambda;
  state.params.zero_grad();
  for (int g = 0; g < groups; ++g) {
    if (results[g].bad_ray >= 0) {
      const RayTarget& rt = batch[results[g].bad_ray];
      std::ostringstream msg;
      msg << "non-finite loss at iteration " << state.iteration << ", batch ray "
          << results[g].bad_ray << " origin (" << rt.ray.origin.x << ", " << rt.ray.origin.y
          << ", " << rt.ray.origin.z << ") direction (" << rt.ray.direction.x << ", "
          << rt.ray.direction.y << ", " << rt.ray.direction.z << ")";
      throw RuntimeError(msg.str());
    }
    row.l_photo += results[g].l_photo;
    row.l_s += results[g].l_s;
    results[g].grads.flush_into(state.params);
  }
  row.l_photo /= real(cfg.rays_per_iter);
  row.l_s /= real(cfg.rays_per_iter);
  row.beta = state.density.beta(state.params);

  state.optimizer->step(state.params);
  ++state.iteration;
  return row;
}

FitState fit_scene(const MultiViewDataset& dataset, const FitConfig& cfg) {
  dataset.validate();
  FitState state = init_fit(cfg);
  for (int it = 0; it < cfg.total_iters; ++it) {
    LossRow row = fit_step(state, dataset, cfg);
    if (it % cfg.log_every == 0 || it + 1 == cfg.total_iters) state.curve.push_back(row);
  }
  return state;
}

}  // namespace trisdf
