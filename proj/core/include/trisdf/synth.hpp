#pragma once

#include <filesystem>

#include "trisdf/field.hpp"
#include "trisdf/fitting.hpp"
#include "trisdf/image.hpp"
#include "trisdf/renderer.hpp"

namespace trisdf {

struct OrbitSpec {
  int count = 50;
  real radius = 2.5;
  real elevation_deg = 20;
  real fov_deg = 30;  // vertical field of view
};

// A closed-form scene rendered through the volumetric pipeline with the
// analytic SDF standing in for the learned field.
struct SceneSpec {
  int version = 1;
  AnalyticSdf sdf;
  OrbitSpec orbit;
  int image_width = 64;
  int image_height = 64;
  SamplerConfig sampler{.n_uniform = 48, .n_importance = 48, .t_near = 0.5, .t_far = 4.5};
  real oracle_beta = 0.005;
  Shading shading = Shading::Lambert;
  Rgb background{0, 0, 0};
  std::uint64_t seed = 1;
  int gt_mesh_resolution = 256;

  void validate() const;
};

SceneSpec load_scene_spec(const std::filesystem::path& path);
void save_scene_spec(const std::filesystem::path& path, const SceneSpec& spec);

// Camera `index` of the orbit ring: azimuth 2 pi index / count at the
// given elevation, looking at the origin, world up +z.
Camera orbit_camera(const OrbitSpec& orbit, int index, int width, int height);

// Per-pixel two-pass renders over the extent box, composited over the
// background; optionally reports the expected depth per pixel.
Image render_frame(const SdfField& field, real beta, const Aabb& extent, const Camera& camera,
                   const SamplerConfig& sampler, const Rgb& background, std::uint64_t seed,
                   std::vector<real>* depth_out = nullptr);

// Renders the scene's orbit views to `dir/images/view_###.png`, writes
// `dir/manifest.json` and the analytic zero-level-set mesh
// `dir/gt_mesh.obj`. Deterministic for a fixed spec.
void generate_dataset(const SceneSpec& spec, const std::filesystem::path& dir,
                      bool write_depth = false);

}  // namespace trisdf
