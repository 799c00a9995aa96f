#pragma once

// Independent reference implementations used to check the library:
// dense quadrature for volumetric integrals, brute-force nearest
// neighbors, a min-cost-flow assignment solver, distribution test
// statistics, and small mesh/cloud constructors. None of these call the
// code paths they verify.

#include <cstdint>
#include <functional>
#include <vector>

#include "trisdf/field.hpp"
#include "trisdf/geometry.hpp"
#include "trisdf/metrics.hpp"

namespace trisdf::testing {

struct QuadratureResult {
  Rgb color{0, 0, 0};
  real depth = 0;
  real transmittance = 1;
};

// Dense midpoint evaluation of the transmittance-weighted color/depth
// integrals for continuous profiles sigma(t), c(t) on [t0, t1].
QuadratureResult dense_quadrature(const std::function<real(real)>& sigma,
                                  const std::function<Rgb(real)>& color, real t0, real t1,
                                  int n = 4096);

// Kolmogorov-Smirnov statistic of samples against the uniform law on
// [lo, hi]. Samples need not be sorted.
real ks_statistic_uniform(std::vector<real> samples, real lo, real hi);

// O(|a| * |b|) exact nearest-neighbor distances.
std::vector<real> brute_force_nn(const PointCloud& a, const PointCloud& b);

// Exact assignment via successive shortest paths on the bipartite
// min-cost-flow formulation; independent of solve_assignment.
real min_cost_assignment_flow(const std::vector<real>& cost, int n);

// Exhaustive minimum over all n! assignments (n <= 8).
real min_cost_assignment_exhaustive(const std::vector<real>& cost, int n);

// Axis-aligned box surface as 12 triangles.
TriangleMesh make_box_mesh(const Vec3& center, const Vec3& half_extents);

// n points uniform on the sphere surface, deterministic.
PointCloud sample_sphere_surface(const Vec3& center, real radius, int n, std::uint64_t seed);

// Scene with constant signed distance everywhere (no surface).
class ConstantField : public SdfField {
 public:
  ConstantField(real s, Rgb c) : s_(s), c_(c) {}
  real sdf(const Vec3&) const override { return s_; }
  Rgb color(const Vec3&) const override { return c_; }

 private:
  real s_;
  Rgb c_;
};

}  // namespace trisdf::testing
