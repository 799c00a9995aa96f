#include "trisdf/field.hpp"

#include <algorithm>
#include <cmath>

#include "trisdf/rng.hpp"

namespace trisdf {

real sdf_to_density(real s, real beta) {
  if (!(beta > 0)) throw ContractError("sdf_to_density: beta must be positive");
  return ad::laplace_sigma(s, beta);
}

namespace {

std::vector<real> scaled_normal(Rng& rng, std::size_t n, real scale) {
  std::vector<real> out(n);
  for (auto& x : out) x = real(rng.normal()) * scale;
  return out;
}

// y = W x + b. The tape's Affine op runs the same loop, so plain and
// taped forwards match bitwise.
void affine_forward(const real* w, const real* b, int rows, int cols, const real* x,
                    real* y) {
  for (int r = 0; r < rows; ++r) {
    const real* wr = w + static_cast<std::size_t>(r) * cols;
    real acc = b[r];
    for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

}  // namespace

SdfColorNetwork SdfColorNetwork::create(ad::ParamStore& params, int input_dim, int hidden,
                                        std::uint64_t seed, const std::string& prefix) {
  if (input_dim < 1 || hidden < 1) throw ContractError("network dimensions must be positive");
  SdfColorNetwork net;
  net.input_dim = input_dim;
  net.hidden = hidden;
  const real s1 = std::sqrt(real(2) / real(input_dim));
  const real s2 = std::sqrt(real(2) / real(hidden));
  Rng r1 = Rng::stream(seed, 1);
  Rng r2 = Rng::stream(seed, 2);
  Rng r3 = Rng::stream(seed, 3);
  Rng r4 = Rng::stream(seed, 4);
  const std::size_t n1 = static_cast<std::size_t>(hidden) * input_dim;
  net.w1_sdf = params.add(prefix + ".sdf.w1", {hidden, input_dim}, scaled_normal(r1, n1, s1));
  net.b1_sdf = params.add(prefix + ".sdf.b1", {hidden});
  net.w2_sdf = params.add(prefix + ".sdf.w2", {1, hidden}, scaled_normal(r2, hidden, s2));
  net.b2_sdf = params.add(prefix + ".sdf.b2", {1});
  net.w1_col = params.add(prefix + ".col.w1", {hidden, input_dim}, scaled_normal(r3, n1, s1));
  net.b1_col = params.add(prefix + ".col.b1", {hidden});
  net.w2_col = params.add(prefix + ".col.w2", {3, hidden}, scaled_normal(r4, 3 * hidden, s2));
  net.b2_col = params.add(prefix + ".col.b2", {3});
  return net;
}

SdfColorNetwork SdfColorNetwork::attach(const ad::ParamStore& params, int input_dim,
                                        int hidden, const std::string& prefix) {
  SdfColorNetwork net;
  net.input_dim = input_dim;
  net.hidden = hidden;
  net.w1_sdf = params.require(prefix + ".sdf.w1");
  net.b1_sdf = params.require(prefix + ".sdf.b1");
  net.w2_sdf = params.require(prefix + ".sdf.w2");
  net.b2_sdf = params.require(prefix + ".sdf.b2");
  net.w1_col = params.require(prefix + ".col.w1");
  net.b1_col = params.require(prefix + ".col.b1");
  net.w2_col = params.require(prefix + ".col.w2");
  net.b2_col = params.require(prefix + ".col.b2");
  return net;
}

void eval_field(const ad::ParamStore& params, const SdfColorNetwork& net,
                std::span<const real> features, real& s_out, Rgb& c_out) {
  if (static_cast<int>(features.size()) != net.input_dim)
    throw ContractError("eval_field: feature length mismatch");
  const int h = net.hidden;
  std::vector<real> hid(h);

  affine_forward(params.value(net.w1_sdf).data(), params.value(net.b1_sdf).data(), h,
                 net.input_dim, features.data(), hid.data());
  for (int i = 0; i < h; ++i) hid[i] = ad::softplus(hid[i]);
  affine_forward(params.value(net.w2_sdf).data(), params.value(net.b2_sdf).data(), 1, h,
                 hid.data(), &s_out);

  affine_forward(params.value(net.w1_col).data(), params.value(net.b1_col).data(), h,
                 net.input_dim, features.data(), hid.data());
  for (int i = 0; i < h; ++i) hid[i] = ad::softplus(hid[i]);
  real raw[3];
  affine_forward(params.value(net.w2_col).data(), params.value(net.b2_col).data(), 3, h,
                 hid.data(), raw);
  for (int i = 0; i < 3; ++i) c_out[i] = ad::sigmoid(raw[i]);
}

real eval_sdf(const ad::ParamStore& params, const SdfColorNetwork& net,
              std::span<const real> features) {
  if (static_cast<int>(features.size()) != net.input_dim)
    throw ContractError("eval_sdf: feature length mismatch");
  const int h = net.hidden;
  std::vector<real> hid(h);
  affine_forward(params.value(net.w1_sdf).data(), params.value(net.b1_sdf).data(), h,
                 net.input_dim, features.data(), hid.data());
  for (int i = 0; i < h; ++i) hid[i] = ad::softplus(hid[i]);
  real s;
  affine_forward(params.value(net.w2_sdf).data(), params.value(net.b2_sdf).data(), 1, h,
                 hid.data(), &s);
  return s;
}

FieldNodes field_forward_nodes(ad::Tape& tape, const SdfColorNetwork& net, ad::Var features) {
  if (tape.size(features) != net.input_dim)
    throw ContractError("field_forward_nodes: feature length mismatch");
  ad::Var hs = tape.softplus(tape.affine(net.w1_sdf, net.b1_sdf, features));
  ad::Var s = tape.affine(net.w2_sdf, net.b2_sdf, hs);
  ad::Var hc = tape.softplus(tape.affine(net.w1_col, net.b1_col, features));
  ad::Var c = tape.sigmoid(tape.affine(net.w2_col, net.b2_col, hc));
  return {s, c};
}

ad::Var sdf_forward_node(ad::Tape& tape, const SdfColorNetwork& net, ad::Var features) {
  if (tape.size(features) != net.input_dim)
    throw ContractError("sdf_forward_node: feature length mismatch");
  ad::Var hs = tape.softplus(tape.affine(net.w1_sdf, net.b1_sdf, features));
  return tape.affine(net.w2_sdf, net.b2_sdf, hs);
}

// ---------------------------------------------------------------------------
// LaplaceDensity

LaplaceDensity LaplaceDensity::create(ad::ParamStore& params, real beta_init, real beta_min,
                                      const std::string& name) {
  if (!(beta_init >= beta_min) || !(beta_min > 0))
    throw ContractError("LaplaceDensity: need beta_init >= beta_min > 0");
  LaplaceDensity d;
  d.fixed_beta_ = beta_init;
  d.beta_min_ = beta_min;
  d.raw_param_ = params.add(name, {1}, {ad::softplus_inverse(beta_init - beta_min)});
  return d;
}

LaplaceDensity LaplaceDensity::attach(const ad::ParamStore& params, bool learnable,
                                      real beta_init, real beta_min, const std::string& name) {
  LaplaceDensity d;
  d.learnable_ = learnable;
  d.fixed_beta_ = beta_init;
  d.beta_min_ = beta_min;
  d.raw_param_ = params.require(name);
  return d;
}

real LaplaceDensity::beta(const ad::ParamStore& params) const {
  if (!learnable_) return fixed_beta_;
  return beta_min_ + ad::softplus(params.value(raw_param_)[0]);
}

ad::Var LaplaceDensity::beta_node(ad::Tape& tape, const ad::ParamStore& params) const {
  if (!learnable_) return tape.constant(fixed_beta_);
  (void)params;
  return tape.add_const(tape.softplus(tape.param(raw_param_)), beta_min_);
}

void LaplaceDensity::make_learnable(ad::ParamStore& params) {
  if (learnable_) return;
  params.value(raw_param_)[0] = ad::softplus_inverse(fixed_beta_ - beta_min_);
  learnable_ = true;
}

// ---------------------------------------------------------------------------
// Analytic scenes

AnalyticSdf AnalyticSdf::sphere(const Vec3& center, real radius, bool positive_inside) {
  SdfPrimitive p;
  p.kind = SdfPrimitive::Kind::Sphere;
  p.center = center;
  p.radius = radius;
  AnalyticSdf s;
  s.primitives.push_back(p);
  s.positive_inside = positive_inside;
  return s;
}

AnalyticSdf AnalyticSdf::box(const Vec3& center, const Vec3& half_extents,
                             bool positive_inside) {
  SdfPrimitive p;
  p.kind = SdfPrimitive::Kind::Box;
  p.center = center;
  p.half_extents = half_extents;
  AnalyticSdf s;
  s.primitives.push_back(p);
  s.positive_inside = positive_inside;
  return s;
}

namespace {

// outside-positive distances
real primitive_distance(const SdfPrimitive& prim, const Vec3& p) {
  switch (prim.kind) {
    case SdfPrimitive::Kind::Sphere:
      return (p - prim.center).norm() - prim.radius;
    case SdfPrimitive::Kind::Box: {
      Vec3 d = p - prim.center;
      Vec3 q{std::abs(d.x) - prim.half_extents.x, std::abs(d.y) - prim.half_extents.y,
             std::abs(d.z) - prim.half_extents.z};
      Vec3 outside{std::max(q.x, real(0)), std::max(q.y, real(0)), std::max(q.z, real(0))};
      real inside = std::min(std::max(q.x, std::max(q.y, q.z)), real(0));
      return outside.norm() + inside;
    }
  }
  return 0;
}

}  // namespace

real eval_analytic(const AnalyticSdf& sdf, const Vec3& p) {
  if (sdf.primitives.empty()) throw ContractError("eval_analytic: no primitives");
  real d = primitive_distance(sdf.primitives[0], p);
  for (std::size_t i = 1; i < sdf.primitives.size(); ++i)
    d = std::min(d, primitive_distance(sdf.primitives[i], p));
  return sdf.positive_inside ? -d : d;
}

int nearest_primitive(const AnalyticSdf& sdf, const Vec3& p) {
  if (sdf.primitives.empty()) throw ContractError("nearest_primitive: no primitives");
  int best = 0;
  real best_d = std::abs(primitive_distance(sdf.primitives[0], p));
  for (std::size_t i = 1; i < sdf.primitives.size(); ++i) {
    real d = std::abs(primitive_distance(sdf.primitives[i], p));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

AnalyticField::AnalyticField(AnalyticSdf sdf, Shading shading, Vec3 light_dir)
    : sdf_(std::move(sdf)), shading_(shading), light_dir_(light_dir.normalized()) {}

real AnalyticField::sdf(const Vec3& p) const { return eval_analytic(sdf_, p); }

Rgb AnalyticField::color(const Vec3& p) const {
  const SdfPrimitive& prim = sdf_.primitives[nearest_primitive(sdf_, p)];
  Rgb albedo = prim.albedo;
  if (shading_ == Shading::Flat) return albedo;
  // Half-Lambert from a fixed directional light; view-independent, so
  // the learned color head can represent it.
  const real h = real(1e-4);
  Vec3 g{eval_analytic(sdf_, {p.x + h, p.y, p.z}) - eval_analytic(sdf_, {p.x - h, p.y, p.z}),
         eval_analytic(sdf_, {p.x, p.y + h, p.z}) - eval_analytic(sdf_, {p.x, p.y - h, p.z}),
         eval_analytic(sdf_, {p.x, p.y, p.z + h}) - eval_analytic(sdf_, {p.x, p.y, p.z - h})};
  real gn = g.norm();
  real shade = real(0.75);
  if (gn > 0) {
    // gradient points toward increasing s; flip to an outward normal
    Vec3 n = sdf_.positive_inside ? (g / -gn) : (g / gn);
    shade = real(0.35) + real(0.65) * std::max(real(0), n.dot(-light_dir_));
  }
  return {albedo[0] * shade, albedo[1] * shade, albedo[2] * shade};
}

LearnedField::LearnedField(const ad::ParamStore& params, const SdfColorNetwork& net,
                           const TriplaneGrid& grid, const PositionalEncoder& enc)
    : params_(&params), net_(&net), grid_(&grid), enc_(&enc) {}

real LearnedField::sdf(const Vec3& p) const {
  return eval_sdf(*params_, *net_, augmented_features(*params_, *grid_, *enc_, p));
}

Rgb LearnedField::color(const Vec3& p) const {
  real s;
  Rgb c;
  eval_field(*params_, *net_, augmented_features(*params_, *grid_, *enc_, p), s, c);
  return c;
}

FieldSample LearnedField::sample(const Vec3& p, real beta) const {
  FieldSample out;
  eval_field(*params_, *net_, augmented_features(*params_, *grid_, *enc_, p), out.s, out.c);
  out.sigma = sdf_to_density(out.s, beta);
  return out;
}

}  // namespace trisdf
