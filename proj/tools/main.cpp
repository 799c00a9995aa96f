// Command-line surface: synth, fit, mesh, eval, render.
// Exit codes: 0 success, 1 runtime failure, 2 usage or input error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "trisdf/fitting.hpp"
#include "trisdf/mesh_io.hpp"
#include "trisdf/meshing.hpp"
#include "trisdf/metrics.hpp"
#include "trisdf/rng.hpp"
#include "trisdf/serialize.hpp"
#include "trisdf/synth.hpp"

namespace fs = std::filesystem;
using namespace trisdf;

namespace {

int cmd_synth(const fs::path& scene_path, const fs::path& out_dir, bool depth,
              const std::uint64_t* seed_override) {
  SceneSpec spec = load_scene_spec(scene_path);
  if (seed_override) spec.seed = *seed_override;
  generate_dataset(spec, out_dir, depth);
  std::cout << "wrote " << spec.orbit.count << " views, manifest and ground-truth mesh to "
            << out_dir.string() << " (seed " << spec.seed << ")\n";
  return 0;
}

int cmd_fit(const fs::path& dataset_dir, const fs::path& config_path, const fs::path& out_dir,
            const std::uint64_t* seed_override, int threads_override) {
  FitConfig cfg = config_path.empty() ? FitConfig{} : load_fit_config(config_path);
  if (seed_override) cfg.seed = *seed_override;
  if (threads_override > 0) cfg.threads = threads_override;
  const MultiViewDataset dataset = load_dataset(dataset_dir);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw RuntimeError("cannot create output directory: " + out_dir.string());

  const FitState state = fit_scene(dataset, cfg);

  CheckpointMeta meta;
  meta.triplane_resolution = cfg.triplane_resolution;
  meta.triplane_channels = cfg.triplane_channels;
  meta.pe_levels = cfg.pe_levels;
  meta.hidden = cfg.hidden;
  meta.beta_init = cfg.beta_init;
  meta.beta_min = cfg.beta_min;
  meta.beta_learnable = state.density.learnable();
  meta.extent = cfg.extent;
  meta.seed = cfg.seed;
  meta.iterations = state.iteration;
  save_checkpoint(out_dir / "checkpoint.json", state.params, meta);
  save_loss_csv(out_dir / "loss.csv", state.curve);
  save_fit_config(out_dir / "fit_config.json", cfg);

  // validation render of view 0 through the same pipeline
  const LearnedField field(state.params, state.net, state.grid, state.encoder);
  const Image validation =
      render_frame(field, state.density.beta(state.params), cfg.extent, dataset.cameras[0],
                   cfg.sampler, dataset.background, cfg.seed);
  write_png(out_dir / "val_view0.png", validation);

  const LossRow& last = state.curve.back();
  std::cout << "fit finished: iters " << state.iteration << ", l_photo " << last.l_photo
            << ", l_s " << last.l_s << ", beta " << last.beta << "\n"
            << "checkpoint " << (out_dir / "checkpoint.json").string() << "\n";
  return 0;
}

int cmd_mesh(const fs::path& checkpoint_path, int resolution, const fs::path& out_path) {
  const LoadedModel model = load_checkpoint(checkpoint_path);
  const LearnedField field(model.params, model.net, model.grid, model.encoder);
  const ScalarGrid grid = sample_sdf_grid([&](const Vec3& p) { return field.sdf(p); },
                                          model.meta.extent, resolution);
  const TriangleMesh mesh = marching_cubes(grid, 0, true);
  if (mesh.faces.empty())
    std::cerr << "warning: level set not found, writing an empty mesh\n";
  save_mesh(out_path, mesh);
  std::cout << "wrote " << mesh.vertices.size() << " vertices / " << mesh.faces.size()
            << " faces to " << out_path.string() << "\n";
  return 0;
}

int cmd_eval(const fs::path& gt_path, const fs::path& pred_path, int n, int repeats,
             std::uint64_t seed, int emd_subsample, const fs::path& json_out,
             const fs::path& csv_out) {
  const TriangleMesh gt = load_mesh(gt_path);
  const TriangleMesh pred = load_mesh(pred_path);
  const MetricReport report = evaluate_meshes(gt, pred, n, repeats, seed, emd_subsample);
  if (!json_out.empty()) save_metric_report(json_out, report);
  if (!csv_out.empty()) atomic_write_text(csv_out, metric_report_csv(report));
  std::cout << metric_report_to_json(report);
  return 0;
}

int cmd_render(const fs::path& checkpoint_path, real azimuth_deg, real elevation_deg,
               real radius, real fov_deg, int width, int height, std::uint64_t seed,
               const fs::path& out_path, const fs::path& depth_path) {
  const LoadedModel model = load_checkpoint(checkpoint_path);
  // reuse the orbit parameterization with one-degree steps
  OrbitSpec orbit{.count = 360, .radius = radius, .elevation_deg = elevation_deg,
                  .fov_deg = fov_deg};
  const Camera cam = orbit_camera(orbit, static_cast<int>(azimuth_deg), width, height);
  const LearnedField field(model.params, model.net, model.grid, model.encoder);
  SamplerConfig sampler{.n_uniform = 48, .n_importance = 48, .t_near = 0.05,
                        .t_far = 2 * radius + 2};
  std::vector<real> depth;
  const Image image = render_frame(field, model.density.beta(model.params),
                                   model.meta.extent, cam, sampler, Rgb{0, 0, 0}, seed,
                                   depth_path.empty() ? nullptr : &depth);
  write_png(out_path, image);
  if (!depth_path.empty()) write_pgm16(depth_path, depth, width, height);
  std::cout << "wrote " << out_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"triplane SDF volume-rendering toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option_function<std::uint64_t>(
         "--seed", [&](std::uint64_t s) { seed = s; seed_set = true; },
         "override the seed recorded in configs/specs")
      ->expected(1);

  auto* synth = app.add_subcommand("synth", "render a scene spec into a posed dataset");
  fs::path scene_path, out_dir;
  bool synth_depth = false;
  synth->add_option("--scene", scene_path, "scene spec JSON")->required();
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_flag("--depth", synth_depth, "also write per-view depth maps (PGM)");

  auto* fit = app.add_subcommand("fit", "optimize a model against a posed dataset");
  fs::path dataset_dir, fit_config, fit_out;
  int fit_threads = 0;
  fit->add_option("--dataset", dataset_dir, "dataset directory (with manifest.json)")
      ->required();
  fit->add_option("--config", fit_config, "fit configuration JSON (defaults when omitted)");
  fit->add_option("--out", fit_out, "output directory")->required();
  fit->add_option("--threads", fit_threads, "worker threads for the ray batch");

  auto* mesh = app.add_subcommand("mesh", "extract the zero level set of a checkpoint");
  fs::path ckpt_path, mesh_out;
  int mesh_res = 256;
  mesh->add_option("--checkpoint", ckpt_path, "checkpoint JSON")->required();
  mesh->add_option("--res", mesh_res, "lattice resolution per axis");
  mesh->add_option("--out", mesh_out, "output mesh (.obj or .ply)")->required();

  auto* eval = app.add_subcommand("eval", "3D reconstruction metrics between two meshes");
  fs::path gt_path, pred_path, eval_json, eval_csv;
  int eval_n = 20000, eval_repeats = 20, eval_emd = 1024;
  eval->add_option("--gt", gt_path, "ground-truth mesh")->required();
  eval->add_option("--pred", pred_path, "predicted mesh")->required();
  eval->add_option("--n", eval_n, "points sampled per mesh per repeat");
  eval->add_option("--repeats", eval_repeats, "sampling repeats");
  eval->add_option("--emd-subsample", eval_emd, "points in the assignment subsample");
  eval->add_option("--json", eval_json, "write the report as JSON here");
  eval->add_option("--csv", eval_csv, "write the report as CSV here");

  auto* render = app.add_subcommand("render", "render a checkpoint from an orbit camera");
  fs::path render_out, render_depth;
  real azimuth = 0, elevation = 20, radius = 2.5, fov = 30;
  int render_w = 256, render_h = 256;
  render->add_option("--checkpoint", ckpt_path, "checkpoint JSON")->required();
  render->add_option("--azimuth", azimuth, "orbit azimuth, degrees");
  render->add_option("--elevation", elevation, "orbit elevation, degrees");
  render->add_option("--radius", radius, "orbit radius");
  render->add_option("--fov", fov, "vertical field of view, degrees");
  render->add_option("--width", render_w, "image width");
  render->add_option("--height", render_h, "image height");
  render->add_option("--out", render_out, "output PNG")->required();
  render->add_option("--depth", render_depth, "optional 16-bit PGM depth output");

  try {
    app.parse(argc, argv);
    const std::uint64_t* seed_ptr = seed_set ? &seed : nullptr;
    if (*synth) return cmd_synth(scene_path, out_dir, synth_depth, seed_ptr);
    if (*fit) return cmd_fit(dataset_dir, fit_config, fit_out, seed_ptr, fit_threads);
    if (*mesh) return cmd_mesh(ckpt_path, mesh_res, mesh_out);
    if (*eval)
      return cmd_eval(gt_path, pred_path, eval_n, eval_repeats, seed_set ? seed : 0, eval_emd,
                      eval_json, eval_csv);
    if (*render)
      return cmd_render(ckpt_path, azimuth, elevation, radius, fov, render_w, render_h,
                        seed_set ? seed : 0, render_out, render_depth);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
