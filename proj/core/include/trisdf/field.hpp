#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "trisdf/autodiff.hpp"
#include "trisdf/encoding.hpp"
#include "trisdf/geometry.hpp"

namespace trisdf {

using Rgb = std::array<real, 3>;

// Signed distance to density. Implements the branch form
//   sigma = exp(s/beta) / (2 beta)            for s <= 0
//   sigma = (1 - exp(-s/beta) / 2) / beta     for s >  0
// so density grows with s: this toolkit treats s > 0 as *inside* the
// object. Set `positive_inside = false` on meshes/oracles to
// interoperate with the outside-positive convention.
real sdf_to_density(real s, real beta);

// Two independent heads over the augmented features: an SDF head and a
// color head, each a single softplus hidden layer. Color output is
// squashed to [0,1]^3 with a sigmoid.
struct SdfColorNetwork {
  int input_dim = 0;
  int hidden = 64;
  int w1_sdf = -1, b1_sdf = -1, w2_sdf = -1, b2_sdf = -1;
  int w1_col = -1, b1_col = -1, w2_col = -1, b2_col = -1;

  static SdfColorNetwork create(ad::ParamStore& params, int input_dim, int hidden,
                                std::uint64_t seed, const std::string& prefix = "net");
  static SdfColorNetwork attach(const ad::ParamStore& params, int input_dim, int hidden,
                                const std::string& prefix = "net");
};

struct FieldSample {
  real s = 0;
  Rgb c{0, 0, 0};
  real sigma = 0;
};

// Deterministic forward pass; feature length must match input_dim.
void eval_field(const ad::ParamStore& params, const SdfColorNetwork& net,
                std::span<const real> features, real& s_out, Rgb& c_out);
// SDF head only (coarse sampling does not need colors).
real eval_sdf(const ad::ParamStore& params, const SdfColorNetwork& net,
              std::span<const real> features);

struct FieldNodes {
  ad::Var s;      // scalar
  ad::Var color;  // 3-vector in [0,1]
};
FieldNodes field_forward_nodes(ad::Tape& tape, const SdfColorNetwork& net, ad::Var features);
ad::Var sdf_forward_node(ad::Tape& tape, const SdfColorNetwork& net, ad::Var features);

// Learnable beta with floor: beta = beta_min + softplus(beta_raw).
// While fixed (warmup) the configured value is used directly so the
// trace is bit-stable, and no gradient path to beta exists.
class LaplaceDensity {
 public:
  LaplaceDensity() = default;
  // Registers the raw parameter immediately; it is ignored until
  // make_learnable().
  static LaplaceDensity create(ad::ParamStore& params, real beta_init,
                               real beta_min = 1e-4, const std::string& name = "beta_raw");
  static LaplaceDensity attach(const ad::ParamStore& params, bool learnable, real beta_init,
                               real beta_min = 1e-4, const std::string& name = "beta_raw");

  bool learnable() const { return learnable_; }
  real beta_min() const { return beta_min_; }
  int raw_param() const { return raw_param_; }

  real beta(const ad::ParamStore& params) const;
  ad::Var beta_node(ad::Tape& tape, const ad::ParamStore& params) const;

  // Re-seeds beta_raw from the current fixed value and switches mode.
  void make_learnable(ad::ParamStore& params);

 private:
  bool learnable_ = false;
  real fixed_beta_ = 0.1;
  real beta_min_ = 1e-4;
  int raw_param_ = -1;
};

// Closed-form test/synthesis scenes: spheres, boxes and their union.
struct SdfPrimitive {
  enum class Kind { Sphere, Box };
  Kind kind = Kind::Sphere;
  Vec3 center;
  real radius = 0.5;       // sphere
  Vec3 half_extents;       // box
  Rgb albedo{0.8, 0.8, 0.8};
};

struct AnalyticSdf {
  std::vector<SdfPrimitive> primitives;
  bool positive_inside = true;

  static AnalyticSdf sphere(const Vec3& center, real radius, bool positive_inside = true);
  static AnalyticSdf box(const Vec3& center, const Vec3& half_extents,
                         bool positive_inside = true);
};

// Exact signed distance for single primitives; a union is exact outside
// and a lower bound on the interior distance.
real eval_analytic(const AnalyticSdf& sdf, const Vec3& p);
// Index of the primitive whose surface is closest to p.
int nearest_primitive(const AnalyticSdf& sdf, const Vec3& p);

// Point-queryable scene for the renderer: a signed distance and an
// albedo at any position.
class SdfField {
 public:
  virtual ~SdfField() = default;
  virtual real sdf(const Vec3& p) const = 0;
  virtual Rgb color(const Vec3& p) const = 0;
};

enum class Shading { Flat, Lambert };

class AnalyticField : public SdfField {
 public:
  AnalyticField(AnalyticSdf sdf, Shading shading = Shading::Flat,
                Vec3 light_dir = Vec3{0.5, -1, 0.75});
  real sdf(const Vec3& p) const override;
  Rgb color(const Vec3& p) const override;
  const AnalyticSdf& analytic() const { return sdf_; }

 private:
  AnalyticSdf sdf_;
  Shading shading_;
  Vec3 light_dir_;
};

class LearnedField : public SdfField {
 public:
  LearnedField(const ad::ParamStore& params, const SdfColorNetwork& net,
               const TriplaneGrid& grid, const PositionalEncoder& enc);
  real sdf(const Vec3& p) const override;
  Rgb color(const Vec3& p) const override;
  FieldSample sample(const Vec3& p, real beta) const;

 private:
  const ad::ParamStore* params_;
  const SdfColorNetwork* net_;
  const TriplaneGrid* grid_;
  const PositionalEncoder* enc_;
};

}  // namespace trisdf
