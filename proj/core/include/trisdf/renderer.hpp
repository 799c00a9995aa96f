#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "trisdf/autodiff.hpp"
#include "trisdf/encoding.hpp"
#include "trisdf/field.hpp"
#include "trisdf/geometry.hpp"

namespace trisdf {

struct SamplerConfig {
  int n_uniform = 24;
  int n_importance = 24;
  real t_near = 0.05;
  real t_far = 6.0;
  bool jitter = true;

  void validate() const;
};

struct RenderOutput {
  Rgb color{0, 0, 0};
  real depth = 0;                 // expected ray distance
  std::vector<real> weights;      // per-sample quadrature weights
  real final_transmittance = 1;   // share of the ray never absorbed
  std::vector<real> t_values;     // sorted sample distances

  // sum(weights) + final_transmittance == 1 up to rounding
  real weight_sum() const;
};

// One jittered (or centered) sample per equal-width bin of
// [t_near, t_far]; sorted.
std::vector<real> stratified_sample(const Ray& ray, const SamplerConfig& cfg,
                                    std::uint64_t seed);
std::vector<real> stratified_sample(real t0, real t1, int n, bool jitter,
                                    std::uint64_t seed);

// Inverse-CDF draws from the piecewise-constant pdf over `t_bins`
// proportional to weights + epsilon floor; sorted. |weights| must be
// |t_bins| - 1; all-zero weights degrade to uniform.
std::vector<real> importance_sample(std::span<const real> t_bins,
                                    std::span<const real> weights, int n,
                                    std::uint64_t seed);

// Quadrature over sorted samples: T_i = exp(-sum_{j<i} sigma_j delta_j),
// w_i = T_i (1 - exp(-sigma_i delta_i)), color = sum w_i c_i,
// depth = sum w_i t_i. The last interval runs to t_far.
RenderOutput composite(std::span<const real> sigmas, std::span<const Rgb> colors,
                       std::span<const real> t_values, real t_far);

// Two-pass render of one ray: stratified pass, importance pass on the
// coarse weights, quadrature once over the union. The integration
// segment is the ray/extent intersection clipped to the config bounds;
// rays missing the extent return a background output (transmittance 1).
RenderOutput render_ray(const SdfField& field, real beta, const Aabb& extent,
                        const Ray& ray, const SamplerConfig& cfg, std::uint64_t seed);

Vec3 surface_point(const Ray& ray, real depth);

// Mean |sdf| at the expected-depth points of the given rays.
real sdf_depth_loss(const SdfField& field, std::span<const Ray> rays,
                    std::span<const real> depths);

// --- differentiable path -----------------------------------------------

struct RayRenderNodes {
  ad::Var color;          // 3-vector node
  ad::Var depth;          // scalar node
  ad::Var transmittance;  // scalar node, share of the ray left unabsorbed
  bool hit = false;
  std::vector<real> t_values;
};

// Same sampling and quadrature as render_ray, but the union pass is
// built on the tape so gradients reach the planes, the network and
// beta. The coarse pass stays detached: sample placement is treated as
// a constant of the graph. Pass `fixed_t_values` to integrate a
// caller-pinned sample set instead (finite-difference checks need this,
// since re-deriving placement from perturbed parameters would move the
// quadrature points under the check).
RayRenderNodes render_ray_nodes(ad::Tape& tape, const ad::ParamStore& params,
                                const SdfColorNetwork& net, const TriplaneGrid& grid,
                                const PositionalEncoder& enc, const LaplaceDensity& density,
                                const Ray& ray, const SamplerConfig& cfg, std::uint64_t seed,
                                const std::vector<real>* fixed_t_values = nullptr);

// SDF value at ray.at(depth) with gradients flowing through both the
// field and (unless detached by the caller) the depth node.
ad::Var sdf_at_depth_node(ad::Tape& tape, const SdfColorNetwork& net,
                          const TriplaneGrid& grid, const PositionalEncoder& enc,
                          const Ray& ray, ad::Var depth);

namespace detail {
// Shared by the plain and taped render paths so both integrate the
// exact same sample set for a given seed.
std::vector<real> union_samples(const std::function<real(const Vec3&)>& sdf_at, real beta,
                                const Ray& ray, real t0, real t1, const SamplerConfig& cfg,
                                std::uint64_t seed);
}  // namespace detail

}  // namespace trisdf
