#include "trisdf/serialize.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "trisdf/image.hpp"

namespace trisdf {

using json = nlohmann::ordered_json;

void atomic_write_text(const std::filesystem::path& path, std::string_view text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot open for writing: " + tmp.string());
    out << text;
    if (!out) throw RuntimeError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint64_t fnv1a_file_hash(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

namespace {

json parse(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InputError("malformed JSON in " + what);
  return j;
}

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("expected a 3-element array");
  return {j[0].get<real>(), j[1].get<real>(), j[2].get<real>()};
}

json rgb_to_json(const Rgb& c) { return json::array({c[0], c[1], c[2]}); }

Rgb rgb_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("expected a 3-element array");
  return {j[0].get<real>(), j[1].get<real>(), j[2].get<real>()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  json j;
  j["version"] = manifest.version;
  j["image_dir"] = manifest.image_dir;
  j["background"] = rgb_to_json(manifest.background);
  j["seed"] = manifest.seed;
  if (!manifest.gt_mesh.empty()) j["gt_mesh"] = manifest.gt_mesh;
  json views = json::array();
  for (const auto& v : manifest.views) {
    json jv;
    jv["file"] = v.file;
    jv["fx"] = v.fx;
    jv["fy"] = v.fy;
    jv["cx"] = v.cx;
    jv["cy"] = v.cy;
    jv["width"] = v.width;
    jv["height"] = v.height;
    jv["camera_to_world"] = v.camera_to_world;
    views.push_back(jv);
  }
  j["views"] = views;
  atomic_write_text(path, j.dump(2) + "\n");
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  json j = parse(read_text_file(path), path.string());
  DatasetManifest m;
  m.version = j.at("version").get<int>();
  if (m.version != 1) throw InputError("unsupported manifest version in " + path.string());
  m.image_dir = j.at("image_dir").get<std::string>();
  m.background = rgb_from_json(j.at("background"));
  m.seed = j.value("seed", std::uint64_t(0));
  m.gt_mesh = j.value("gt_mesh", std::string());
  for (const auto& jv : j.at("views")) {
    ManifestView v;
    v.file = jv.at("file").get<std::string>();
    v.fx = jv.at("fx").get<real>();
    v.fy = jv.at("fy").get<real>();
    v.cx = jv.at("cx").get<real>();
    v.cy = jv.at("cy").get<real>();
    v.width = jv.at("width").get<int>();
    v.height = jv.at("height").get<int>();
    const auto& m4 = jv.at("camera_to_world");
    if (!m4.is_array() || m4.size() != 16)
      throw InputError("camera_to_world must have 16 entries in " + path.string());
    for (int i = 0; i < 16; ++i) v.camera_to_world[i] = m4[i].get<real>();
    m.views.push_back(v);
  }
  return m;
}

MultiViewDataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path))
    throw InputError("missing dataset manifest: " + manifest_path.string());
  const DatasetManifest manifest = load_manifest(manifest_path);
  MultiViewDataset dataset;
  dataset.background = manifest.background;
  for (const auto& v : manifest.views) {
    Camera cam;
    cam.fx = v.fx;
    cam.fy = v.fy;
    cam.cx = v.cx;
    cam.cy = v.cy;
    cam.width = v.width;
    cam.height = v.height;
    cam.pose = Pose::from_matrix4(v.camera_to_world);
    cam.validate();
    dataset.cameras.push_back(cam);
    const auto image_path = dir / manifest.image_dir / v.file;
    if (!std::filesystem::exists(image_path))
      throw InputError("missing dataset image: " + image_path.string());
    Image img = read_png(image_path);
    if (img.width != v.width || img.height != v.height)
      throw InputError("image size disagrees with manifest: " + image_path.string());
    dataset.images.push_back(std::move(img));
  }
  dataset.validate();
  return dataset;
}

// ---------------------------------------------------------------------------
// Fit configuration

namespace {

json sampler_to_json(const SamplerConfig& s) {
  json j;
  j["n_uniform"] = s.n_uniform;
  j["n_importance"] = s.n_importance;
  j["t_near"] = s.t_near;
  j["t_far"] = s.t_far;
  j["jitter"] = s.jitter;
  return j;
}

SamplerConfig sampler_from_json(const json& j) {
  SamplerConfig s;
  s.n_uniform = j.value("n_uniform", s.n_uniform);
  s.n_importance = j.value("n_importance", s.n_importance);
  s.t_near = j.value("t_near", s.t_near);
  s.t_far = j.value("t_far", s.t_far);
  s.jitter = j.value("jitter", s.jitter);
  return s;
}

json aabb_to_json(const Aabb& box) {
  json j;
  j["min"] = vec3_to_json(box.lo);
  j["max"] = vec3_to_json(box.hi);
  return j;
}

Aabb aabb_from_json(const json& j) {
  Aabb box;
  box.lo = vec3_from_json(j.at("min"));
  box.hi = vec3_from_json(j.at("max"));
  box.validate();
  return box;
}

}  // namespace

void save_fit_config(const std::filesystem::path& path, const FitConfig& cfg) {
  json j;
  j["version"] = 1;
  j["total_iters"] = cfg.total_iters;
  j["warmup_iters"] = cfg.warmup_iters;
  j["lambda_final"] = cfg.lambda_final;
  j["beta_init"] = cfg.beta_init;
  j["beta_min"] = cfg.beta_min;
  j["rays_per_iter"] = cfg.rays_per_iter;
  j["lr_triplane"] = cfg.lr_triplane;
  j["lr_network"] = cfg.lr_network;
  j["lr_beta"] = cfg.lr_beta;
  j["seed"] = cfg.seed;
  j["sampler"] = sampler_to_json(cfg.sampler);
  j["log_every"] = cfg.log_every;
  j["triplane_resolution"] = cfg.triplane_resolution;
  j["triplane_channels"] = cfg.triplane_channels;
  j["pe_levels"] = cfg.pe_levels;
  j["hidden"] = cfg.hidden;
  j["extent"] = aabb_to_json(cfg.extent);
  j["detach_depth_in_sdf_loss"] = cfg.detach_depth_in_sdf_loss;
  j["init_sphere_radius"] = cfg.init_sphere_radius;
  j["init_iters"] = cfg.init_iters;
  j["init_points"] = cfg.init_points;
  j["grad_groups"] = cfg.grad_groups;
  j["threads"] = cfg.threads;
  atomic_write_text(path, j.dump(2) + "\n");
}

FitConfig load_fit_config(const std::filesystem::path& path) {
  json j = parse(read_text_file(path), path.string());
  FitConfig cfg;
  cfg.total_iters = j.value("total_iters", cfg.total_iters);
  cfg.warmup_iters = j.value("warmup_iters", cfg.warmup_iters);
  cfg.lambda_final = j.value("lambda_final", cfg.lambda_final);
  cfg.beta_init = j.value("beta_init", cfg.beta_init);
  cfg.beta_min = j.value("beta_min", cfg.beta_min);
  cfg.rays_per_iter = j.value("rays_per_iter", cfg.rays_per_iter);
  cfg.lr_triplane = j.value("lr_triplane", cfg.lr_triplane);
  cfg.lr_network = j.value("lr_network", cfg.lr_network);
  cfg.lr_beta = j.value("lr_beta", cfg.lr_beta);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("sampler")) cfg.sampler = sampler_from_json(j.at("sampler"));
  cfg.log_every = j.value("log_every", cfg.log_every);
  cfg.triplane_resolution = j.value("triplane_resolution", cfg.triplane_resolution);
  cfg.triplane_channels = j.value("triplane_channels", cfg.triplane_channels);
  cfg.pe_levels = j.value("pe_levels", cfg.pe_levels);
  cfg.hidden = j.value("hidden", cfg.hidden);
  if (j.contains("extent")) cfg.extent = aabb_from_json(j.at("extent"));
  cfg.detach_depth_in_sdf_loss = j.value("detach_depth_in_sdf_loss", cfg.detach_depth_in_sdf_loss);
  cfg.init_sphere_radius = j.value("init_sphere_radius", cfg.init_sphere_radius);
  cfg.init_iters = j.value("init_iters", cfg.init_iters);
  cfg.init_points = j.value("init_points", cfg.init_points);
  cfg.grad_groups = j.value("grad_groups", cfg.grad_groups);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Checkpoints

void save_checkpoint(const std::filesystem::path& path, const ad::ParamStore& params,
                     const CheckpointMeta& meta) {
  json j;
  j["version"] = meta.version;
  j["kind"] = "trisdf-checkpoint";
  json model;
  model["triplane_resolution"] = meta.triplane_resolution;
  model["triplane_channels"] = meta.triplane_channels;
  model["pe_levels"] = meta.pe_levels;
  model["hidden"] = meta.hidden;
  model["extent"] = aabb_to_json(meta.extent);
  j["model"] = model;
  json beta;
  beta["learnable"] = meta.beta_learnable;
  beta["init"] = meta.beta_init;
  beta["min"] = meta.beta_min;
  j["beta"] = beta;
  json run;
  run["seed"] = meta.seed;
  run["iterations"] = meta.iterations;
  j["run"] = run;
  json jp;
  for (int p = 0; p < params.count(); ++p) {
    json entry;
    entry["shape"] = params.shape(p);
    auto vals = params.value(p);
    entry["data"] = std::vector<real>(vals.begin(), vals.end());
    jp[params.name(p)] = entry;
  }
  j["params"] = jp;
  atomic_write_text(path, j.dump() + "\n");
}

LoadedModel load_checkpoint(const std::filesystem::path& path) {
  json j = parse(read_text_file(path), path.string());
  if (j.value("kind", std::string()) != "trisdf-checkpoint")
    throw InputError("not a checkpoint file: " + path.string());
  LoadedModel model;
  CheckpointMeta& meta = model.meta;
  meta.version = j.at("version").get<int>();
  if (meta.version != 1) throw InputError("unsupported checkpoint version: " + path.string());
  const json& jm = j.at("model");
  meta.triplane_resolution = jm.at("triplane_resolution").get<int>();
  meta.triplane_channels = jm.at("triplane_channels").get<int>();
  meta.pe_levels = jm.at("pe_levels").get<int>();
  meta.hidden = jm.at("hidden").get<int>();
  meta.extent = aabb_from_json(jm.at("extent"));
  const json& jb = j.at("beta");
  meta.beta_learnable = jb.at("learnable").get<bool>();
  meta.beta_init = jb.at("init").get<real>();
  meta.beta_min = jb.at("min").get<real>();
  meta.seed = j.at("run").value("seed", std::uint64_t(0));
  meta.iterations = j.at("run").value("iterations", 0);

  for (const auto& [name, entry] : j.at("params").items()) {
    std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
    std::vector<real> data = entry.at("data").get<std::vector<real>>();
    model.params.add(name, std::move(shape), std::move(data));
  }

  model.encoder.levels = meta.pe_levels;
  model.grid = TriplaneGrid::attach(model.params, meta.triplane_resolution,
                                    meta.triplane_channels, meta.extent);
  const int input_dim = model.grid.feature_dim() + model.encoder.dim_per_point();
  model.net = SdfColorNetwork::attach(model.params, input_dim, meta.hidden);
  model.density = LaplaceDensity::attach(model.params, meta.beta_learnable, meta.beta_init,
                                         meta.beta_min);
  return model;
}

// ---------------------------------------------------------------------------
// Loss curves / metric reports

namespace {

std::string fmt_real(real v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", double(v));
  return buf;
}

}  // namespace

void save_loss_csv(const std::filesystem::path& path, std::span<const LossRow> rows) {
  std::string out = "iter,l_photo,l_s,beta,lambda\n";
  for (const LossRow& r : rows) {
    out += std::to_string(r.iter) + "," + fmt_real(r.l_photo) + "," + fmt_real(r.l_s) + "," +
           fmt_real(r.beta) + "," + fmt_real(r.lambda) + "\n";
  }
  atomic_write_text(path, out);
}

namespace {

json stats_to_json(const MetricStats& s) {
  json j;
  j["mean"] = s.mean;
  j["std"] = s.stddev;
  return j;
}

MetricStats stats_from_json(const json& j) {
  return {j.at("mean").get<real>(), j.at("std").get<real>()};
}

}  // namespace

std::string metric_report_to_json(const MetricReport& report) {
  json j;
  j["version"] = 1;
  j["n_points"] = report.n_points;
  j["n_repeats"] = report.n_repeats;
  j["emd_subsample"] = report.emd_subsample;
  j["seed"] = report.seed;
  json metrics;
  metrics["chamfer"] = stats_to_json(report.chamfer);
  metrics["mse"] = stats_to_json(report.mse);
  metrics["hausdorff"] = stats_to_json(report.hausdorff);
  metrics["emd"] = stats_to_json(report.emd);
  metrics["msd"] = stats_to_json(report.msd);
  j["metrics"] = metrics;
  return j.dump(2) + "\n";
}

MetricReport metric_report_from_json(const std::string& text) {
  json j = parse(text, "metric report");
  MetricReport report;
  report.n_points = j.at("n_points").get<int>();
  report.n_repeats = j.at("n_repeats").get<int>();
  report.emd_subsample = j.at("emd_subsample").get<int>();
  report.seed = j.at("seed").get<std::uint64_t>();
  const json& m = j.at("metrics");
  report.chamfer = stats_from_json(m.at("chamfer"));
  report.mse = stats_from_json(m.at("mse"));
  report.hausdorff = stats_from_json(m.at("hausdorff"));
  report.emd = stats_from_json(m.at("emd"));
  report.msd = stats_from_json(m.at("msd"));
  return report;
}

std::string metric_report_csv(const MetricReport& report) {
  std::string out =
      "chamfer_mean,chamfer_std,mse_mean,mse_std,hd_mean,hd_std,emd_mean,emd_std,"
      "msd_mean,msd_std,n_points,n_repeats,emd_subsample,seed\n";
  out += fmt_real(report.chamfer.mean) + "," + fmt_real(report.chamfer.stddev) + "," +
         fmt_real(report.mse.mean) + "," + fmt_real(report.mse.stddev) + "," +
         fmt_real(report.hausdorff.mean) + "," + fmt_real(report.hausdorff.stddev) + "," +
         fmt_real(report.emd.mean) + "," + fmt_real(report.emd.stddev) + "," +
         fmt_real(report.msd.mean) + "," + fmt_real(report.msd.stddev) + "," +
         std::to_string(report.n_points) + "," + std::to_string(report.n_repeats) + "," +
         std::to_string(report.emd_subsample) + "," + std::to_string(report.seed) + "\n";
  return out;
}

void save_metric_report(const std::filesystem::path& path, const MetricReport& report) {
  if (path.extension() == ".csv")
    atomic_write_text(path, metric_report_csv(report));
  else
    atomic_write_text(path, metric_report_to_json(report));
}

}  // namespace trisdf
