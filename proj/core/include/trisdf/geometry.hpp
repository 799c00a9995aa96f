#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "trisdf/common.hpp"

namespace trisdf {

struct Vec3 {
  real x = 0, y = 0, z = 0;

  Vec3() = default;
  Vec3(real x_, real y_, real z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(real s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(real s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

  real dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  real norm() const { return std::sqrt(dot(*this)); }
  real squared_norm() const { return dot(*this); }
  Vec3 normalized() const { return *this / norm(); }
  real operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(real s, const Vec3& v) { return v * s; }
inline Vec3 min(const Vec3& a, const Vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

// Row-major 3x3 matrix; enough linear algebra for camera poses.
struct Mat3 {
  std::array<real, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }
  static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    Mat3 r;
    r.m = {c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z};
    return r;
  }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 transposed() const {
    Mat3 r;
    r.m = {m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]};
    return r;
  }
  real det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
};

// Rigid camera-to-world transform. Convention (documented in
// docs/FORMATS.md): right-handed world, camera +z forward, image y down.
struct Pose {
  Mat3 rotation;
  Vec3 translation;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 rotate(const Vec3& v) const { return rotation * v; }

  // Orthonormal within tol and det +1.
  bool is_rigid(real tol = 1e-6) const;

  std::array<real, 16> to_matrix4() const;
  static Pose from_matrix4(const std::array<real, 16>& m);
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length

  Vec3 at(real t) const { return origin + direction * t; }
};

// Validated constructor; throws unless |direction| = 1 within 1e-9.
Ray make_ray(const Vec3& origin, const Vec3& direction);

struct Camera {
  real fx = 0, fy = 0;  // focal lengths, pixels
  real cx = 0, cy = 0;  // principal point, pixels
  int width = 0, height = 0;
  Pose pose;  // camera-to-world

  void validate() const;  // throws InputError on invariant violation
};

// Camera at `eye` looking at `target`, principal point at the image
// center.
Camera make_lookat_camera(const Vec3& eye, const Vec3& target, const Vec3& up,
                          real fx, real fy, int width, int height);

struct Aabb {
  Vec3 lo{-1, -1, -1};
  Vec3 hi{1, 1, 1};

  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
           p.z >= lo.z && p.z <= hi.z;
  }
  Vec3 center() const { return (lo + hi) * real(0.5); }
  Vec3 extent() const { return hi - lo; }
  void validate() const;  // min < max componentwise
};

// Entry/exit ray parameters through the box, or nullopt on a miss.
// The returned interval is clipped to t >= 0.
std::optional<std::pair<real, real>> intersect_aabb(const Ray& ray, const Aabb& box);

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  bool empty() const { return vertices.empty() || faces.empty(); }
};

// Throws InputError on out-of-range indices, non-finite vertices, or a
// face with a repeated index.
void validate_mesh(const TriangleMesh& mesh);

real triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
real surface_area(const TriangleMesh& mesh);

// World-space ray through the center of pixel (px, py).
Ray ray_for_pixel(const Camera& camera, real px, real py);

// n points drawn area-weighted uniformly over the surface.
// Deterministic for a fixed seed.
std::vector<Vec3> sample_points_on_mesh(const TriangleMesh& mesh, std::size_t n,
                                        std::uint64_t seed);

struct UnitSphereNormalization {
  TriangleMesh mesh;
  real scale = 1;   // applied as v_out = (v_in - center) * scale
  Vec3 center;      // bounding-box center of the input
};

// Recenters on the bounding-box center and scales so max |v| = 1.
UnitSphereNormalization normalize_to_unit_sphere(const TriangleMesh& mesh);

// Topology checks used by the extraction and evaluation paths.
// An edge is "boundary" when it belongs to exactly one face.
std::size_t boundary_edge_count(const TriangleMesh& mesh);
std::size_t unique_edge_count(const TriangleMesh& mesh);
long euler_characteristic(const TriangleMesh& mesh);
// Positive for consistently outward-wound closed meshes.
real signed_volume(const TriangleMesh& mesh);

}  // namespace trisdf
