#include "trisdf/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>

#include "trisdf/rng.hpp"

namespace trisdf {

bool Pose::is_rigid(real tol) const {
  const Mat3& r = rotation;
  Mat3 rt = r.transposed();
  // R^T R == I
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      real dot = 0;
      for (int k = 0; k < 3; ++k) dot += rt.m[i * 3 + k] * r.m[k * 3 + j];
      real expect = (i == j) ? real(1) : real(0);
      if (std::abs(dot - expect) > tol) return false;
    }
  }
  return std::abs(r.det() - real(1)) <= tol;
}

std::array<real, 16> Pose::to_matrix4() const {
  return {rotation.m[0], rotation.m[1], rotation.m[2], translation.x,
          rotation.m[3], rotation.m[4], rotation.m[5], translation.y,
          rotation.m[6], rotation.m[7], rotation.m[8], translation.z,
          0,             0,             0,             1};
}

Pose Pose::from_matrix4(const std::array<real, 16>& m) {
  Pose p;
  p.rotation.m = {m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]};
  p.translation = {m[3], m[7], m[11]};
  return p;
}

Ray make_ray(const Vec3& origin, const Vec3& direction) {
  if (!origin.finite() || !direction.finite())
    throw InputError("ray components must be finite");
  if (std::abs(direction.norm() - real(1)) > 1e-9)
    throw InputError("ray direction must be unit length");
  return Ray{origin, direction};
}

void Camera::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw InputError("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InputError("camera image size must be positive");
  if (!pose.is_rigid()) throw InputError("camera pose is not a rigid transform");
}

Camera make_lookat_camera(const Vec3& eye, const Vec3& target, const Vec3& up,
                          real fx, real fy, int width, int height) {
  Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  real rn = right.norm();
  if (rn < 1e-9) throw InputError("look-at direction is parallel to up vector");
  right = right / rn;
  Vec3 down = forward.cross(right);
  Camera cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = real(width) / 2;
  cam.cy = real(height) / 2;
  cam.width = width;
  cam.height = height;
  cam.pose.rotation = Mat3::from_columns(right, down, forward);
  cam.pose.translation = eye;
  cam.validate();
  return cam;
}

void Aabb::validate() const {
  if (!(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z))
    throw InputError("box min must be smaller than max componentwise");
}

std::optional<std::pair<real, real>> intersect_aabb(const Ray& ray, const Aabb& box) {
  real t0 = 0;
  real t1 = std::numeric_limits<real>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    real o = ray.origin[axis];
    real d = ray.direction[axis];
    real lo = box.lo[axis];
    real hi = box.hi[axis];
    if (d == 0) {
      if (o < lo || o > hi) return std::nullopt;
      continue;
    }
    real ta = (lo - o) / d;
    real tb = (hi - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

void validate_mesh(const TriangleMesh& mesh) {
  const int n = static_cast<int>(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices) {
    if (!v.finite()) throw InputError("mesh vertex is not finite");
  }
  for (const auto& f : mesh.faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= n) throw InputError("mesh face index out of range");
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
      throw InputError("mesh face repeats a vertex index");
  }
}

real triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return real(0.5) * (b - a).cross(c - a).norm();
}

real surface_area(const TriangleMesh& mesh) {
  real total = 0;
  for (const auto& f : mesh.faces)
    total += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
  return total;
}

Ray ray_for_pixel(const Camera& camera, real px, real py) {
  if (px < 0 || px >= camera.width || py < 0 || py >= camera.height)
    throw InputError("pixel (" + std::to_string(double(px)) + ", " +
                     std::to_string(double(py)) + ") outside image bounds");
  Vec3 dir_cam{(px + real(0.5) - camera.cx) / camera.fx,
               (py + real(0.5) - camera.cy) / camera.fy, 1};
  Vec3 dir = camera.pose.rotate(dir_cam).normalized();
  return Ray{camera.pose.translation, dir};
}

std::vector<Vec3> sample_points_on_mesh(const TriangleMesh& mesh, std::size_t n,
                                        std::uint64_t seed) {
  if (mesh.empty()) throw InputError("cannot sample points from an empty mesh");
  if (n == 0) throw InputError("sample count must be >= 1");

  std::vector<real> cumulative(mesh.faces.size());
  real total = 0;
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const auto& f = mesh.faces[i];
    total += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
    cumulative[i] = total;
  }
  if (!(total > 0)) throw InputError("mesh has zero surface area");

  Rng rng = Rng::stream(seed, 0x6d657368);
  std::vector<Vec3> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    real u = real(rng.uniform()) * total;
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t fi = std::min<std::size_t>(it - cumulative.begin(), mesh.faces.size() - 1);
    const auto& f = mesh.faces[fi];
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    // sqrt trick gives uniform barycentric coordinates
    real r1 = std::sqrt(real(rng.uniform()));
    real r2 = real(rng.uniform());
    points.push_back(a * (1 - r1) + b * (r1 * (1 - r2)) + c * (r1 * r2));
  }
  return points;
}

UnitSphereNormalization normalize_to_unit_sphere(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) throw InputError("cannot normalize an empty mesh");
  Vec3 lo = mesh.vertices[0];
  Vec3 hi = mesh.vertices[0];
  for (const Vec3& v : mesh.vertices) {
    lo = min(lo, v);
    hi = max(hi, v);
  }
  Vec3 center = (lo + hi) * real(0.5);
  real max_radius = 0;
  for (const Vec3& v : mesh.vertices) max_radius = std::max(max_radius, (v - center).norm());
  if (!(max_radius > 0)) throw InputError("mesh is a single point, cannot normalize");

  UnitSphereNormalization out;
  out.center = center;
  out.scale = real(1) / max_radius;
  out.mesh.faces = mesh.faces;
  out.mesh.vertices.reserve(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices) out.mesh.vertices.push_back((v - center) * out.scale);
  return out;
}

namespace {

using EdgeKey = std::pair<int, int>;

std::map<EdgeKey, int> edge_face_counts(const TriangleMesh& mesh) {
  std::map<EdgeKey, int> counts;
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      int a = f[e];
      int b = f[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++counts[{a, b}];
    }
  }
  return counts;
}

}  // namespace

std::size_t boundary_edge_count(const TriangleMesh& mesh) {
  std::size_t boundary = 0;
  for (const auto& [edge, count] : edge_face_counts(mesh))
    if (count == 1) ++boundary;
  return boundary;
}

std::size_t unique_edge_count(const TriangleMesh& mesh) {
  return edge_face_counts(mesh).size();
}

long euler_characteristic(const TriangleMesh& mesh) {
  return static_cast<long>(mesh.vertices.size()) -
         static_cast<long>(unique_edge_count(mesh)) +
         static_cast<long>(mesh.faces.size());
}

real signed_volume(const TriangleMesh& mesh) {
  real vol = 0;
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    vol += a.dot(b.cross(c));
  }
  return vol / 6;
}

}  // namespace trisdf
