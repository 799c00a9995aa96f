#include "trisdf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "trisdf/rng.hpp"

namespace trisdf {

// ---------------------------------------------------------------------------
// KdTree

namespace {
constexpr int kLeafSize = 8;
}

KdTree::KdTree(PointCloud points) : points_(std::move(points)) {
  if (points_.empty()) throw InputError("KdTree: empty point set");
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  root_ = build(0, static_cast<int>(points_.size()));
}

int KdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  Vec3 lo = points_[begin], hi = points_[begin];
  for (int i = begin + 1; i < end; ++i) {
    lo = min(lo, points_[i]);
    hi = max(hi, points_[i]);
  }
  const Vec3 ext = hi - lo;
  int axis = 0;
  if (ext.y > ext.x) axis = 1;
  if (ext.z > ext[axis]) axis = 2;
  const int mid = (begin + end) / 2;
  std::nth_element(points_.begin() + begin, points_.begin() + mid, points_.begin() + end,
                   [axis](const Vec3& a, const Vec3& b) { return a[axis] < b[axis]; });
  nodes_[id].axis = static_cast<std::uint8_t>(axis);
  nodes_[id].split = points_[mid][axis];
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(int node, const Vec3& q, real& best_sq) const {
  const Node& n = nodes_[node];
  if (n.left < 0) {
    for (int i = n.begin; i < n.end; ++i)
      best_sq = std::min(best_sq, (points_[i] - q).squared_norm());
    return;
  }
  const real diff = q[n.axis] - n.split;
  const int near = diff < 0 ? n.left : n.right;
  const int far = diff < 0 ? n.right : n.left;
  search(near, q, best_sq);
  if (diff * diff < best_sq) search(far, q, best_sq);
}

real KdTree::nearest_distance(const Vec3& query) const {
  real best_sq = std::numeric_limits<real>::infinity();
  search(root_, query, best_sq);
  return std::sqrt(best_sq);
}

// ---------------------------------------------------------------------------
// Cloud metrics

std::vector<real> nn_dists(const PointCloud& from, const PointCloud& to) {
  if (to.empty()) throw InputError("nn_dists: target cloud is empty");
  KdTree tree(to);
  std::vector<real> dists(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) dists[i] = tree.nearest_distance(from[i]);
  return dists;
}

namespace {

void require_nonempty(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw InputError("metric on an empty point cloud");
}

real mean(const std::vector<real>& v) {
  return std::accumulate(v.begin(), v.end(), real(0)) / real(v.size());
}

}  // namespace

real chamfer(const PointCloud& a, const PointCloud& b) {
  require_nonempty(a, b);
  return (mean(nn_dists(a, b)) + mean(nn_dists(b, a))) / 2;
}

real mse(const PointCloud& a, const PointCloud& b) {
  require_nonempty(a, b);
  auto sq_mean = [](const std::vector<real>& d) {
    real acc = 0;
    for (real x : d) acc += x * x;
    return acc / real(d.size());
  };
  return (sq_mean(nn_dists(a, b)) + sq_mean(nn_dists(b, a))) / 2;
}

real msd(const PointCloud& a, const PointCloud& b) {
  require_nonempty(a, b);
  auto ab = nn_dists(a, b);
  auto ba = nn_dists(b, a);
  real acc = std::accumulate(ab.begin(), ab.end(), real(0)) +
             std::accumulate(ba.begin(), ba.end(), real(0));
  return acc / real(ab.size() + ba.size());
}

real hausdorff(const PointCloud& a, const PointCloud& b) {
  require_nonempty(a, b);
  auto ab = nn_dists(a, b);
  auto ba = nn_dists(b, a);
  return std::max(*std::max_element(ab.begin(), ab.end()),
                  *std::max_element(ba.begin(), ba.end()));
}

// ---------------------------------------------------------------------------
// Assignment / EMD

std::vector<int> solve_assignment(const std::vector<real>& cost, int n) {
  if (n < 1) throw ContractError("solve_assignment: n must be >= 1");
  if (cost.size() != static_cast<std::size_t>(n) * n)
    throw ContractError("solve_assignment: cost matrix size mismatch");
  const real inf = std::numeric_limits<real>::infinity();

  // shortest augmenting paths with potentials; 1-based helpers
  std::vector<real> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), char(0));
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      real delta = inf;
      int j1 = -1;
      const real* row = cost.data() + static_cast<std::size_t>(i0 - 1) * n;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const real cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

namespace {

std::vector<int> subsample_indices(std::size_t total, int count, std::uint64_t seed) {
  std::vector<int> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = Rng::stream(seed, 0x656d64);
  for (int i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(total - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace

real emd(const PointCloud& a, const PointCloud& b, int subsample, std::uint64_t seed) {
  require_nonempty(a, b);
  if (subsample < 1) throw InputError("emd: subsample must be >= 1");
  if (a.size() < static_cast<std::size_t>(subsample) ||
      b.size() < static_cast<std::size_t>(subsample))
    throw InputError("emd: cloud smaller than the subsample size");

  const auto ia = subsample_indices(a.size(), subsample, seed);
  const auto ib = subsample_indices(b.size(), subsample, seed);
  const int n = subsample;
  std::vector<real> cost(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const Vec3& pa = a[ia[i]];
    for (int j = 0; j < n; ++j)
      cost[static_cast<std::size_t>(i) * n + j] = (pa - b[ib[j]]).norm();
  }
  const auto match = solve_assignment(cost, n);
  real total = 0;
  for (int i = 0; i < n; ++i) total += cost[static_cast<std::size_t>(i) * n + match[i]];
  return total / real(n);
}

// ---------------------------------------------------------------------------
// Mesh evaluation protocol

MetricReport evaluate_meshes(const TriangleMesh& ground_truth, const TriangleMesh& predicted,
                             int n_points, int repeats, std::uint64_t seed,
                             int emd_subsample) {
  validate_mesh(ground_truth);
  validate_mesh(predicted);
  if (n_points < 1 || repeats < 1) throw InputError("evaluate_meshes: need n >= 1, repeats >= 1");
  if (emd_subsample > n_points)
    throw InputError("evaluate_meshes: emd subsample exceeds point count");

  const TriangleMesh gt = normalize_to_unit_sphere(ground_truth).mesh;
  const TriangleMesh pred = normalize_to_unit_sphere(predicted).mesh;

  std::vector<real> v_chamfer, v_mse, v_hd, v_emd, v_msd;
  for (int r = 0; r < repeats; ++r) {
    const auto pa = sample_points_on_mesh(gt, n_points, Rng::stream(seed, r, 0).next_u64());
    const auto pb = sample_points_on_mesh(pred, n_points, Rng::stream(seed, r, 1).next_u64());
    const auto d_ab = nn_dists(pa, pb);
    const auto d_ba = nn_dists(pb, pa);
    real sum_ab = 0, sum_ba = 0, sq_ab = 0, sq_ba = 0, max_ab = 0, max_ba = 0;
    for (real d : d_ab) {
      sum_ab += d;
      sq_ab += d * d;
      max_ab = std::max(max_ab, d);
    }
    for (real d : d_ba) {
      sum_ba += d;
      sq_ba += d * d;
      max_ba = std::max(max_ba, d);
    }
    const real na = real(d_ab.size()), nb = real(d_ba.size());
    v_chamfer.push_back((sum_ab / na + sum_ba / nb) / 2);
    v_mse.push_back((sq_ab / na + sq_ba / nb) / 2);
    v_hd.push_back(std::max(max_ab, max_ba));
    v_msd.push_back((sum_ab + sum_ba) / (na + nb));
    v_emd.push_back(emd(pa, pb, emd_subsample, Rng::stream(seed, r, 2).next_u64()));
  }

  auto stats = [&](const std::vector<real>& v) {
    MetricStats s;
    s.mean = mean(v);
    if (v.size() > 1) {
      real acc = 0;
      for (real x : v) acc += (x - s.mean) * (x - s.mean);
      s.stddev = std::sqrt(acc / real(v.size() - 1));
    }
    return s;
  };

  MetricReport report;
  report.chamfer = stats(v_chamfer);
  report.mse = stats(v_mse);
  report.hausdorff = stats(v_hd);
  report.emd = stats(v_emd);
  report.msd = stats(v_msd);
  report.n_points = n_points;
  report.n_repeats = repeats;
  report.emd_subsample = emd_subsample;
  report.seed = seed;
  return report;
}

}  // namespace trisdf
