#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "trisdf/autodiff.hpp"
#include "trisdf/encoding.hpp"
#include "trisdf/field.hpp"
#include "trisdf/geometry.hpp"
#include "trisdf/image.hpp"
#include "trisdf/renderer.hpp"

namespace trisdf {

struct FitConfig {
  int total_iters = 20000;
  int warmup_iters = 5000;  // N: beta fixed and lambda 0 before this iteration
  real lambda_final = 0.1;
  real beta_init = 0.1;
  real beta_min = 1e-4;
  int rays_per_iter = 64;
  real lr_triplane = 1e-2;
  real lr_network = 1e-3;
  real lr_beta = 1e-3;
  std::uint64_t seed = 1;
  SamplerConfig sampler{.n_uniform = 24, .n_importance = 24, .t_near = 0.05, .t_far = 6.0};
  int log_every = 100;

  // model shape
  int triplane_resolution = 64;
  int triplane_channels = 16;
  int pe_levels = 4;
  int hidden = 64;
  Aabb extent;  // defaults to [-1,1]^3

  bool detach_depth_in_sdf_loss = false;

  // geometry initialization: SDF head pretrained toward a centered
  // sphere before fitting
  real init_sphere_radius = 0.3;
  int init_iters = 300;
  int init_points = 512;

  // gradient reduction runs over this many fixed ray groups, merged in
  // group order, so results do not depend on the thread count
  int grad_groups = 4;
  int threads = 1;

  void validate() const;
};

struct ScheduleState {
  bool beta_learnable = false;
  real lambda = 0;
};

// iter < N: beta fixed at beta_init, lambda 0.
// iter >= N: beta learnable, lambda = lambda_final.
ScheduleState schedule(int iter, const FitConfig& cfg);

struct MultiViewDataset {
  std::vector<Image> images;  // [0,1] RGB, all the same size
  std::vector<Camera> cameras;
  Rgb background{0, 0, 0};

  void validate() const;
};

struct LossRow {
  int iter = 0;
  real l_photo = 0;
  real l_s = 0;
  real beta = 0;
  real lambda = 0;
};

struct FitState {
  int iteration = 0;
  ad::ParamStore params;
  SdfColorNetwork net;
  TriplaneGrid grid;
  PositionalEncoder encoder;
  LaplaceDensity density;
  std::unique_ptr<ad::AdamOptimizer> optimizer;
  std::vector<LossRow> curve;
};

// Builds parameters and runs the sphere pretraining of the SDF head.
FitState init_fit(const FitConfig& cfg);

// One optimizer iteration: sample a ray batch, accumulate gradients of
// mean squared pixel error + lambda * L_s, apply Adam. Deterministic
// given (config, seed, iteration).
LossRow fit_step(FitState& state, const MultiViewDataset& dataset, const FitConfig& cfg);

FitState fit_scene(const MultiViewDataset& dataset, const FitConfig& cfg);

// Pulls the SDF head toward a centered sphere of the given radius
// (inside-positive: s = radius - |p|). Gives the depth-consistency
// constraint a sane starting surface.
void pretrain_sdf_sphere(ad::ParamStore& params, const SdfColorNetwork& net,
                         const TriplaneGrid& grid, const PositionalEncoder& enc,
                         real radius, std::uint64_t seed, int iters, int batch, real lr);

}  // namespace trisdf
