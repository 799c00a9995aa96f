#include "trisdf/encoding.hpp"

#include <algorithm>
#include <cmath>

namespace trisdf {

void positional_encode(real a, int levels, std::span<real> out) {
  if (!std::isfinite(a)) throw ContractError("positional_encode: input must be finite");
  if (static_cast<int>(out.size()) != 1 + 2 * levels)
    throw ContractError("positional_encode: output span has wrong size");
  out[0] = a;
  real freq = real(M_PI);
  for (int k = 0; k < levels; ++k, freq *= 2) {
    out[1 + 2 * k] = std::sin(freq * a);
    out[2 + 2 * k] = std::cos(freq * a);
  }
}

std::vector<real> positional_encode(real a, int levels) {
  std::vector<real> out(1 + 2 * levels);
  positional_encode(a, levels, out);
  return out;
}

TriplaneGrid TriplaneGrid::create(ad::ParamStore& params, int resolution, int channels,
                                  const Aabb& extent, const std::string& prefix) {
  if (resolution < 2) throw ContractError("triplane resolution must be >= 2");
  if (channels < 1) throw ContractError("triplane channels must be >= 1");
  extent.validate();
  TriplaneGrid g;
  g.resolution = resolution;
  g.channels = channels;
  g.extent = extent;
  std::vector<int> shape{resolution, resolution, channels};
  g.plane_xy = params.add(prefix + ".xy", shape);
  g.plane_xz = params.add(prefix + ".xz", shape);
  g.plane_yz = params.add(prefix + ".yz", shape);
  return g;
}

TriplaneGrid TriplaneGrid::attach(const ad::ParamStore& params, int resolution, int channels,
                                  const Aabb& extent, const std::string& prefix) {
  TriplaneGrid g;
  g.resolution = resolution;
  g.channels = channels;
  g.extent = extent;
  g.plane_xy = params.require(prefix + ".xy");
  g.plane_xz = params.require(prefix + ".xz");
  g.plane_yz = params.require(prefix + ".yz");
  return g;
}

real TriplaneGrid::grid_coord(real x, int axis) const {
  const real lo = extent.lo[axis];
  const real hi = extent.hi[axis];
  return (x - lo) * (real(resolution - 1) / (hi - lo));
}

namespace {

// Shared bilinear kernel; the tape op mirrors this arithmetic so plain
// and taped evaluations agree bitwise.
void bilinear(const real* plane, int res, int channels, real u, real v, real* out) {
  int i0 = std::clamp(static_cast<int>(std::floor(u)), 0, res - 2);
  int j0 = std::clamp(static_cast<int>(std::floor(v)), 0, res - 2);
  real fu = u - i0;
  real fv = v - j0;
  const real* p00 = plane + (static_cast<std::size_t>(i0) * res + j0) * channels;
  const real* p01 = p00 + channels;
  const real* p10 = p00 + static_cast<std::size_t>(res) * channels;
  const real* p11 = p10 + channels;
  const real w00 = (1 - fu) * (1 - fv);
  const real w01 = (1 - fu) * fv;
  const real w10 = fu * (1 - fv);
  const real w11 = fu * fv;
  for (int c = 0; c < channels; ++c)
    out[c] = w00 * p00[c] + w01 * p01[c] + w10 * p10[c] + w11 * p11[c];
}

}  // namespace

void triplane_sample(const ad::ParamStore& params, const TriplaneGrid& grid,
                     const Vec3& p, std::span<real> out) {
  if (!grid.extent.contains(p))
    throw ContractError("triplane_sample: point outside grid extent");
  if (static_cast<int>(out.size()) != grid.feature_dim())
    throw ContractError("triplane_sample: output span has wrong size");
  const int res = grid.resolution;
  const int ch = grid.channels;
  const real u = grid.grid_coord(p.x, 0);
  const real v = grid.grid_coord(p.y, 1);
  const real w = grid.grid_coord(p.z, 2);
  bilinear(params.value(grid.plane_xy).data(), res, ch, u, v, out.data());
  bilinear(params.value(grid.plane_xz).data(), res, ch, u, w, out.data() + ch);
  bilinear(params.value(grid.plane_yz).data(), res, ch, v, w, out.data() + 2 * ch);
}

std::vector<real> triplane_sample(const ad::ParamStore& params, const TriplaneGrid& grid,
                                  const Vec3& p) {
  std::vector<real> out(grid.feature_dim());
  triplane_sample(params, grid, p, out);
  return out;
}

std::vector<real> augmented_features(const ad::ParamStore& params, const TriplaneGrid& grid,
                                     const PositionalEncoder& enc, const Vec3& p) {
  const int tri = grid.feature_dim();
  const int per = enc.dim_per_scalar();
  std::vector<real> out(tri + 3 * per);
  triplane_sample(params, grid, p, std::span<real>(out.data(), tri));
  positional_encode(p.x, enc.levels, std::span<real>(out.data() + tri, per));
  positional_encode(p.y, enc.levels, std::span<real>(out.data() + tri + per, per));
  positional_encode(p.z, enc.levels, std::span<real>(out.data() + tri + 2 * per, per));
  return out;
}

ad::Var triplane_sample_nodes(ad::Tape& tape, const TriplaneGrid& grid,
                              const std::array<ad::Var, 3>& p) {
  const real su = real(grid.resolution - 1) / (grid.extent.hi.x - grid.extent.lo.x);
  const real sv = real(grid.resolution - 1) / (grid.extent.hi.y - grid.extent.lo.y);
  const real sw = real(grid.resolution - 1) / (grid.extent.hi.z - grid.extent.lo.z);
  ad::Var u = tape.mul_const(tape.add_const(p[0], -grid.extent.lo.x), su);
  ad::Var v = tape.mul_const(tape.add_const(p[1], -grid.extent.lo.y), sv);
  ad::Var w = tape.mul_const(tape.add_const(p[2], -grid.extent.lo.z), sw);
  std::array<ad::Var, 3> planes = {
      tape.gather_bilinear(grid.plane_xy, u, v),
      tape.gather_bilinear(grid.plane_xz, u, w),
      tape.gather_bilinear(grid.plane_yz, v, w),
  };
  return tape.concat(planes);
}

ad::Var augmented_feature_nodes(ad::Tape& tape, const TriplaneGrid& grid,
                                const PositionalEncoder& enc,
                                const std::array<ad::Var, 3>& p) {
  std::array<ad::Var, 4> parts = {
      triplane_sample_nodes(tape, grid, p),
      tape.frequency_encode(p[0], enc.levels),
      tape.frequency_encode(p[1], enc.levels),
      tape.frequency_encode(p[2], enc.levels),
  };
  return tape.concat(parts);
}

}  // namespace trisdf
