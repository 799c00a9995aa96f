#include "trisdf/synth.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "trisdf/mesh_io.hpp"
#include "trisdf/meshing.hpp"
#include "trisdf/rng.hpp"
#include "trisdf/serialize.hpp"

namespace trisdf {

using json = nlohmann::ordered_json;

void SceneSpec::validate() const {
  if (sdf.primitives.empty()) throw InputError("scene: needs at least one primitive");
  if (image_width < 1 || image_height < 1) throw InputError("scene: bad image size");
  if (orbit.count < 1) throw InputError("scene: orbit count must be >= 1");
  if (!(orbit.radius > 0)) throw InputError("scene: orbit radius must be positive");
  if (!(orbit.fov_deg > 0 && orbit.fov_deg < 180)) throw InputError("scene: bad field of view");
  if (!(oracle_beta > 0)) throw InputError("scene: oracle_beta must be positive");
  if (gt_mesh_resolution < 2) throw InputError("scene: gt_mesh_resolution must be >= 2");
  const Aabb unit_cube;
  for (const auto& prim : sdf.primitives) {
    if (!unit_cube.contains(prim.center))
      throw InputError("scene: primitive center outside [-1,1]^3");
  }
  sampler.validate();
}

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
Vec3 vec3_parse(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("scene: expected 3-element array");
  return {j[0].get<real>(), j[1].get<real>(), j[2].get<real>()};
}

}  // namespace

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw InputError("malformed JSON in " + path.string());
  SceneSpec spec;
  spec.version = j.value("version", 1);
  if (spec.version != 1) throw InputError("unsupported scene version in " + path.string());
  spec.seed = j.value("seed", spec.seed);
  if (!j.contains("primitives")) throw InputError("scene: missing primitives list");
  for (const auto& jp : j.at("primitives")) {
    SdfPrimitive prim;
    const std::string kind = jp.at("kind").get<std::string>();
    if (kind == "sphere") {
      prim.kind = SdfPrimitive::Kind::Sphere;
      prim.radius = jp.at("radius").get<real>();
    } else if (kind == "box") {
      prim.kind = SdfPrimitive::Kind::Box;
      prim.half_extents = vec3_parse(jp.at("half_extents"));
    } else {
      throw InputError("scene: unknown primitive kind '" + kind + "'");
    }
    prim.center = vec3_parse(jp.at("center"));
    if (jp.contains("albedo")) {
      const auto& ja = jp.at("albedo");
      prim.albedo = {ja[0].get<real>(), ja[1].get<real>(), ja[2].get<real>()};
    }
    spec.sdf.primitives.push_back(prim);
  }
  if (j.contains("orbit")) {
    const json& jo = j.at("orbit");
    spec.orbit.count = jo.value("count", spec.orbit.count);
    spec.orbit.radius = jo.value("radius", spec.orbit.radius);
    spec.orbit.elevation_deg = jo.value("elevation_deg", spec.orbit.elevation_deg);
    spec.orbit.fov_deg = jo.value("fov_deg", spec.orbit.fov_deg);
  }
  if (j.contains("image")) {
    spec.image_width = j.at("image").value("width", spec.image_width);
    spec.image_height = j.at("image").value("height", spec.image_height);
  }
  if (j.contains("sampler")) {
    const json& js = j.at("sampler");
    spec.sampler.n_uniform = js.value("n_uniform", spec.sampler.n_uniform);
    spec.sampler.n_importance = js.value("n_importance", spec.sampler.n_importance);
    spec.sampler.t_near = js.value("t_near", spec.sampler.t_near);
    spec.sampler.t_far = js.value("t_far", spec.sampler.t_far);
    spec.sampler.jitter = js.value("jitter", spec.sampler.jitter);
  }
  spec.oracle_beta = j.value("oracle_beta", spec.oracle_beta);
  const std::string shading = j.value("shading", std::string("lambert"));
  if (shading == "lambert")
    spec.shading = Shading::Lambert;
  else if (shading == "flat")
    spec.shading = Shading::Flat;
  else
    throw InputError("scene: unknown shading '" + shading + "'");
  if (j.contains("background")) {
    const auto& jb = j.at("background");
    spec.background = {jb[0].get<real>(), jb[1].get<real>(), jb[2].get<real>()};
  }
  spec.gt_mesh_resolution = j.value("gt_mesh_resolution", spec.gt_mesh_resolution);
  spec.validate();
  return spec;
}

void save_scene_spec(const std::filesystem::path& path, const SceneSpec& spec) {
  json j;
  j["version"] = spec.version;
  j["seed"] = spec.seed;
  json prims = json::array();
  for (const auto& prim : spec.sdf.primitives) {
    json jp;
    if (prim.kind == SdfPrimitive::Kind::Sphere) {
      jp["kind"] = "sphere";
      jp["center"] = vec3_json(prim.center);
      jp["radius"] = prim.radius;
    } else {
      jp["kind"] = "box";
      jp["center"] = vec3_json(prim.center);
      jp["half_extents"] = vec3_json(prim.half_extents);
    }
    jp["albedo"] = json::array({prim.albedo[0], prim.albedo[1], prim.albedo[2]});
    prims.push_back(jp);
  }
  j["primitives"] = prims;
  json jo;
  jo["count"] = spec.orbit.count;
  jo["radius"] = spec.orbit.radius;
  jo["elevation_deg"] = spec.orbit.elevation_deg;
  jo["fov_deg"] = spec.orbit.fov_deg;
  j["orbit"] = jo;
  json ji;
  ji["width"] = spec.image_width;
  ji["height"] = spec.image_height;
  j["image"] = ji;
  json js;
  js["n_uniform"] = spec.sampler.n_uniform;
  js["n_importance"] = spec.sampler.n_importance;
  js["t_near"] = spec.sampler.t_near;
  js["t_far"] = spec.sampler.t_far;
  js["jitter"] = spec.sampler.jitter;
  j["sampler"] = js;
  j["oracle_beta"] = spec.oracle_beta;
  j["shading"] = spec.shading == Shading::Lambert ? "lambert" : "flat";
  j["background"] = json::array({spec.background[0], spec.background[1], spec.background[2]});
  j["gt_mesh_resolution"] = spec.gt_mesh_resolution;
  atomic_write_text(path, j.dump(2) + "\n");
}

Camera orbit_camera(const OrbitSpec& orbit, int index, int width, int height) {
  const real azimuth = 2 * real(M_PI) * real(index) / real(orbit.count);
  const real elevation = orbit.elevation_deg * real(M_PI) / 180;
  const Vec3 eye{orbit.radius * std::cos(elevation) * std::cos(azimuth),
                 orbit.radius * std::cos(elevation) * std::sin(azimuth),
                 orbit.radius * std::sin(elevation)};
  const real fy = (real(height) / 2) / std::tan(orbit.fov_deg * real(M_PI) / 360);
  return make_lookat_camera(eye, Vec3{0, 0, 0}, Vec3{0, 0, 1}, fy, fy, width, height);
}

Image render_frame(const SdfField& field, real beta, const Aabb& extent, const Camera& camera,
                   const SamplerConfig& sampler, const Rgb& background, std::uint64_t seed,
                   std::vector<real>* depth_out) {
  Image image(camera.width, camera.height);
  if (depth_out) depth_out->assign(static_cast<std::size_t>(camera.width) * camera.height, 0);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const Ray ray = ray_for_pixel(camera, real(x), real(y));
      const std::uint64_t pixel_seed =
          Rng::stream(seed, static_cast<std::uint64_t>(y) * camera.width + x).next_u64();
      const RenderOutput out = render_ray(field, beta, extent, ray, sampler, pixel_seed);
      real* px = image.at(x, y);
      for (int c = 0; c < 3; ++c)
        px[c] = out.color[c] + out.final_transmittance * background[c];
      if (depth_out) (*depth_out)[static_cast<std::size_t>(y) * camera.width + x] = out.depth;
    }
  }
  return image;
}

void generate_dataset(const SceneSpec& spec, const std::filesystem::path& dir,
                      bool write_depth) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir / "images", ec);
  if (ec) throw RuntimeError("cannot create output directory: " + (dir / "images").string());

  const AnalyticField field(spec.sdf, spec.shading);
  const Aabb extent;  // [-1,1]^3

  DatasetManifest manifest;
  manifest.background = spec.background;
  manifest.seed = spec.seed;
  manifest.gt_mesh = "gt_mesh.obj";

  for (int i = 0; i < spec.orbit.count; ++i) {
    const Camera cam = orbit_camera(spec.orbit, i, spec.image_width, spec.image_height);
    const std::uint64_t view_seed = Rng::stream(spec.seed, 0x76696577, i).next_u64();
    std::vector<real> depth;
    const Image img = render_frame(field, spec.oracle_beta, extent, cam, spec.sampler,
                                   spec.background, view_seed,
                                   write_depth ? &depth : nullptr);
    char name[32];
    std::snprintf(name, sizeof(name), "view_%03d.png", i);
    write_png(dir / "images" / name, img);
    if (write_depth) {
      std::snprintf(name, sizeof(name), "depth_%03d.pgm", i);
      write_pgm16(dir / "images" / name, depth, cam.width, cam.height);
    }

    ManifestView view;
    std::snprintf(name, sizeof(name), "view_%03d.png", i);
    view.file = name;
    view.fx = cam.fx;
    view.fy = cam.fy;
    view.cx = cam.cx;
    view.cy = cam.cy;
    view.width = cam.width;
    view.height = cam.height;
    view.camera_to_world = cam.pose.to_matrix4();
    manifest.views.push_back(view);
  }

  const auto sdf_fn = [&](const Vec3& p) { return eval_analytic(spec.sdf, p); };
  const ScalarGrid grid = sample_sdf_grid(sdf_fn, extent, spec.gt_mesh_resolution);
  const TriangleMesh gt = marching_cubes(grid, 0, spec.sdf.positive_inside);
  save_mesh_obj(dir / "gt_mesh.obj", gt);

  save_manifest(dir / "manifest.json", manifest);
}

}  // namespace trisdf
