#pragma once

#include <array>
#include <span>
#include <vector>

#include "trisdf/autodiff.hpp"
#include "trisdf/geometry.hpp"

namespace trisdf {

// Multi-level sine/cosine embedding of a scalar coordinate:
// [a, sin(pi a), cos(pi a), sin(2 pi a), cos(2 pi a), ...,
//  sin(2^{L-1} pi a), cos(2^{L-1} pi a)].
struct PositionalEncoder {
  int levels = 4;  // L; frequencies pi * 2^k for k < L

  int dim_per_scalar() const { return 1 + 2 * levels; }
  int dim_per_point() const { return 3 * dim_per_scalar(); }
};

void positional_encode(real a, int levels, std::span<real> out);
std::vector<real> positional_encode(real a, int levels);

// Three learnable feature planes over a bounding cube. A 3D point's
// feature is the concatenation of its bilinear samples from the xy, xz
// and yz planes (in that order). Planes live in the ParamStore; this
// struct only carries shape and ids.
struct TriplaneGrid {
  int resolution = 64;  // R, nodes per plane side
  int channels = 16;    // C per plane
  Aabb extent;          // node-aligned: extent corners map to plane corners
  int plane_xy = -1;
  int plane_xz = -1;
  int plane_yz = -1;

  static TriplaneGrid create(ad::ParamStore& params, int resolution, int channels,
                             const Aabb& extent, const std::string& prefix = "triplane");
  // Rebind to planes already present in a store (checkpoint loading).
  static TriplaneGrid attach(const ad::ParamStore& params, int resolution, int channels,
                             const Aabb& extent, const std::string& prefix = "triplane");

  int feature_dim() const { return 3 * channels; }
  // Continuous grid coordinate along one axis; extent.lo maps to 0 and
  // extent.hi to resolution-1.
  real grid_coord(real x, int axis) const;
};

// Bilinear feature lookup, features concatenated (xy, xz, yz).
// p must lie inside the grid extent; violations throw ContractError.
void triplane_sample(const ad::ParamStore& params, const TriplaneGrid& grid,
                     const Vec3& p, std::span<real> out);
std::vector<real> triplane_sample(const ad::ParamStore& params, const TriplaneGrid& grid,
                                  const Vec3& p);

// [triplane_sample(p), PE(p.x), PE(p.y), PE(p.z)]
std::vector<real> augmented_features(const ad::ParamStore& params, const TriplaneGrid& grid,
                                     const PositionalEncoder& enc, const Vec3& p);

// Tape builders; the position components may be constants or
// differentiable nodes.
ad::Var triplane_sample_nodes(ad::Tape& tape, const TriplaneGrid& grid,
                              const std::array<ad::Var, 3>& p);
ad::Var augmented_feature_nodes(ad::Tape& tape, const TriplaneGrid& grid,
                                const PositionalEncoder& enc,
                                const std::array<ad::Var, 3>& p);

}  // namespace trisdf
