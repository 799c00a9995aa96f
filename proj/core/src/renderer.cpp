#include "trisdf/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "trisdf/rng.hpp"

namespace trisdf {

void SamplerConfig::validate() const {
  if (!(t_near > 0) || !(t_near < t_far))
    throw ContractError("sampler: need 0 < t_near < t_far");
  if (n_uniform < 1) throw ContractError("sampler: n_uniform must be >= 1");
  if (n_importance > 0 && n_uniform < 2)
    throw ContractError("sampler: importance pass needs n_uniform >= 2");
  if (n_importance < 0) throw ContractError("sampler: n_importance must be >= 0");
}

real RenderOutput::weight_sum() const {
  real s = 0;
  for (real w : weights) s += w;
  return s;
}

std::vector<real> stratified_sample(real t0, real t1, int n, bool jitter,
                                    std::uint64_t seed) {
  std::vector<real> ts(n);
  Rng rng = Rng::stream(seed, 0x73747261);
  const real span = t1 - t0;
  for (int i = 0; i < n; ++i) {
    const real lo = t0 + span * (real(i) / n);
    const real hi = t0 + span * (real(i + 1) / n);
    ts[i] = jitter ? lo + real(rng.uniform()) * (hi - lo) : (lo + hi) / 2;
  }
  return ts;
}

std::vector<real> stratified_sample(const Ray& ray, const SamplerConfig& cfg,
                                    std::uint64_t seed) {
  (void)ray;
  cfg.validate();
  return stratified_sample(cfg.t_near, cfg.t_far, cfg.n_uniform, cfg.jitter, seed);
}

std::vector<real> importance_sample(std::span<const real> t_bins,
                                    std::span<const real> weights, int n,
                                    std::uint64_t seed) {
  if (t_bins.size() < 2) throw ContractError("importance_sample: need at least one bin");
  if (weights.size() + 1 != t_bins.size())
    throw ContractError("importance_sample: |weights| must be |t_bins| - 1");
  for (std::size_t i = 0; i + 1 < t_bins.size(); ++i)
    if (!(t_bins[i] < t_bins[i + 1]))
      throw ContractError("importance_sample: bins must be strictly increasing");

  const real floor_eps = real(1e-5);
  std::vector<real> cdf(weights.size() + 1);
  cdf[0] = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0) throw ContractError("importance_sample: negative weight");
    cdf[i + 1] = cdf[i] + weights[i] + floor_eps;
  }
  const real total = cdf.back();

  Rng rng = Rng::stream(seed, 0x696d706f);
  std::vector<real> ts(n);
  for (int k = 0; k < n; ++k) {
    const real u = real(rng.uniform()) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t bin = std::min<std::size_t>(
        weights.size() - 1, static_cast<std::size_t>(it - cdf.begin()) - 1);
    const real mass = cdf[bin + 1] - cdf[bin];
    const real frac = mass > 0 ? (u - cdf[bin]) / mass : real(0.5);
    ts[k] = t_bins[bin] + frac * (t_bins[bin + 1] - t_bins[bin]);
  }
  std::sort(ts.begin(), ts.end());
  return ts;
}

RenderOutput composite(std::span<const real> sigmas, std::span<const Rgb> colors,
                       std::span<const real> t_values, real t_far) {
  const std::size_t m = sigmas.size();
  if (m == 0) throw ContractError("composite: need at least one sample");
  if (colors.size() != m || t_values.size() != m)
    throw ContractError("composite: input length mismatch");
  for (std::size_t i = 0; i + 1 < m; ++i)
    if (!(t_values[i] < t_values[i + 1]))
      throw ContractError("composite: t_values must be strictly increasing");
  if (t_far < t_values[m - 1]) throw ContractError("composite: t_far before last sample");

  RenderOutput out;
  out.t_values.assign(t_values.begin(), t_values.end());
  out.weights.resize(m);
  real transmittance = 1;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(sigmas[i] >= 0)) throw ContractError("composite: negative density");
    const real delta = (i + 1 < m ? t_values[i + 1] : t_far) - t_values[i];
    const real optical = sigmas[i] * delta;
    const real absorb = -std::expm1(-optical);  // 1 - exp(-optical), stable
    const real w = transmittance * absorb;
    out.weights[i] = w;
    for (int k = 0; k < 3; ++k) out.color[k] += w * colors[i][k];
    out.depth += w * t_values[i];
    transmittance *= std::exp(-optical);
  }
  out.final_transmittance = transmittance;
  return out;
}

namespace detail {

namespace {

// quadrature weights only, for driving the importance pass
std::vector<real> coarse_weights(std::span<const real> sigmas,
                                 std::span<const real> t_values, real t_far) {
  std::vector<real> w(sigmas.size());
  real transmittance = 1;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const real delta = (i + 1 < sigmas.size() ? t_values[i + 1] : t_far) - t_values[i];
    const real optical = sigmas[i] * delta;
    w[i] = transmittance * -std::expm1(-optical);
    transmittance *= std::exp(-optical);
  }
  return w;
}

}  // namespace

std::vector<real> union_samples(const std::function<real(const Vec3&)>& sdf_at, real beta,
                                const Ray& ray, real t0, real t1, const SamplerConfig& cfg,
                                std::uint64_t seed) {
  std::vector<real> ts = stratified_sample(t0, t1, cfg.n_uniform, cfg.jitter, seed);
  if (cfg.n_importance > 0) {
    std::vector<real> sigmas(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
      sigmas[i] = sdf_to_density(sdf_at(ray.at(ts[i])), beta);
    std::vector<real> weights = coarse_weights(sigmas, ts, t1);

    // importance bins = the stratified bin edges
    std::vector<real> edges(cfg.n_uniform + 1);
    for (int i = 0; i <= cfg.n_uniform; ++i)
      edges[i] = t0 + (t1 - t0) * (real(i) / cfg.n_uniform);
    std::vector<real> fine = importance_sample(edges, weights, cfg.n_importance, seed + 1);

    std::vector<real> merged;
    merged.reserve(ts.size() + fine.size());
    std::merge(ts.begin(), ts.end(), fine.begin(), fine.end(), std::back_inserter(merged));
    // drop coincident samples so t_values stay strictly increasing
    ts.clear();
    for (real t : merged)
      if (ts.empty() || t - ts.back() > real(1e-12)) ts.push_back(t);
  }
  return ts;
}

}  // namespace detail

namespace {

RenderOutput background_output() { return RenderOutput{}; }

// effective integration bounds: ray/extent intersection clipped to cfg
bool clip_segment(const Ray& ray, const Aabb& extent, const SamplerConfig& cfg, real& t0,
                  real& t1) {
  auto hit = intersect_aabb(ray, extent);
  if (!hit) return false;
  t0 = std::max(cfg.t_near, hit->first);
  t1 = std::min(cfg.t_far, hit->second);
  return t0 < t1;
}

}  // namespace

RenderOutput render_ray(const SdfField& field, real beta, const Aabb& extent, const Ray& ray,
                        const SamplerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  real t0, t1;
  if (!clip_segment(ray, extent, cfg, t0, t1)) return background_output();

  auto sdf_at = [&](const Vec3& p) { return field.sdf(p); };
  std::vector<real> ts = detail::union_samples(sdf_at, beta, ray, t0, t1, cfg, seed);

  std::vector<real> sigmas(ts.size());
  std::vector<Rgb> colors(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Vec3 p = ray.at(ts[i]);
    sigmas[i] = sdf_to_density(field.sdf(p), beta);
    colors[i] = field.color(p);
  }
  return composite(sigmas, colors, ts, t1);
}

Vec3 surface_point(const Ray& ray, real depth) {
  if (!(depth >= 0)) throw ContractError("surface_point: depth must be >= 0");
  return ray.at(depth);
}

real sdf_depth_loss(const SdfField& field, std::span<const Ray> rays,
                    std::span<const real> depths) {
  if (rays.empty()) throw InputError("sdf_depth_loss: empty ray set");
  if (rays.size() != depths.size())
    throw ContractError("sdf_depth_loss: rays/depths length mismatch");
  real acc = 0;
  for (std::size_t i = 0; i < rays.size(); ++i)
    acc += std::abs(field.sdf(surface_point(rays[i], depths[i])));
  return acc / real(rays.size());
}

RayRenderNodes render_ray_nodes(ad::Tape& tape, const ad::ParamStore& params,
                                const SdfColorNetwork& net, const TriplaneGrid& grid,
                                const PositionalEncoder& enc, const LaplaceDensity& density,
                                const Ray& ray, const SamplerConfig& cfg, std::uint64_t seed,
                                const std::vector<real>* fixed_t_values) {
  cfg.validate();
  RayRenderNodes out;
  real t0, t1;
  if (!clip_segment(ray, grid.extent, cfg, t0, t1)) {
    out.color = tape.constant(std::array<real, 3>{0, 0, 0});
    out.depth = tape.constant(real(0));
    out.transmittance = tape.constant(real(1));
    return out;
  }
  out.hit = true;

  std::vector<real> ts;
  if (fixed_t_values) {
    ts = *fixed_t_values;
  } else {
    const real beta_value = density.beta(params);
    auto sdf_at = [&](const Vec3& p) {
      return eval_sdf(params, net, augmented_features(params, grid, enc, p));
    };
    ts = detail::union_samples(sdf_at, beta_value, ray, t0, t1, cfg, seed);
  }
  out.t_values = ts;

  ad::Var beta = density.beta_node(tape, params);
  ad::Var color_acc = tape.constant(std::array<real, 3>{0, 0, 0});
  ad::Var depth_acc = tape.constant(real(0));
  ad::Var transmittance = tape.constant(real(1));
  const std::size_t m = ts.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3 p = ray.at(ts[i]);
    std::array<ad::Var, 3> pos = {tape.constant(p.x), tape.constant(p.y),
                                  tape.constant(p.z)};
    ad::Var features = augmented_feature_nodes(tape, grid, enc, pos);
    FieldNodes f = field_forward_nodes(tape, net, features);
    ad::Var sigma = tape.laplace_density(f.s, beta);

    const real delta = (i + 1 < m ? ts[i + 1] : t1) - ts[i];
    ad::Var optical = tape.mul_const(sigma, delta);
    ad::Var absorb = tape.neg(tape.expm1(tape.neg(optical)));
    ad::Var w = tape.mul(transmittance, absorb);
    color_acc = tape.add(color_acc, tape.scale(w, f.color));
    depth_acc = tape.add(depth_acc, tape.mul_const(w, ts[i]));
    transmittance = tape.mul(transmittance, tape.exp(tape.neg(optical)));
  }
  out.color = color_acc;
  out.depth = depth_acc;
  out.transmittance = transmittance;
  return out;
}

ad::Var sdf_at_depth_node(ad::Tape& tape, const SdfColorNetwork& net,
                          const TriplaneGrid& grid, const PositionalEncoder& enc,
                          const Ray& ray, ad::Var depth) {
  std::array<ad::Var, 3> pos = {
      tape.add_const(tape.mul_const(depth, ray.direction.x), ray.origin.x),
      tape.add_const(tape.mul_const(depth, ray.direction.y), ray.origin.y),
      tape.add_const(tape.mul_const(depth, ray.direction.z), ray.origin.z),
  };
  ad::Var features = augmented_feature_nodes(tape, grid, enc, pos);
  return sdf_forward_node(tape, net, features);
}

}  // namespace trisdf
