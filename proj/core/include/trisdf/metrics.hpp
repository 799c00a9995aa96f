#pragma once

#include <cstdint>
#include <vector>

#include "trisdf/geometry.hpp"

namespace trisdf {

using PointCloud = std::vector<Vec3>;

// Exact nearest-neighbor queries; median-split tree over a copy of the
// points. Immutable after construction and safe to share.
class KdTree {
 public:
  explicit KdTree(PointCloud points);
  real nearest_distance(const Vec3& query) const;
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    int left = -1;
    int right = -1;
    int begin = 0, end = 0;  // leaf range
    std::uint8_t axis = 0;
    real split = 0;
  };
  int build(int begin, int end);
  void search(int node, const Vec3& q, real& best_sq) const;

  PointCloud points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

// Distances from each point of `from` to its nearest point in `to`.
std::vector<real> nn_dists(const PointCloud& from, const PointCloud& to);

// 0.5 (mean_{a->b} + mean_{b->a}), unsquared.
real chamfer(const PointCloud& a, const PointCloud& b);
// Squared counterpart of chamfer.
real mse(const PointCloud& a, const PointCloud& b);
// Mean over the pooled directional distance sets.
real msd(const PointCloud& a, const PointCloud& b);
// max(max_{a->b}, max_{b->a}).
real hausdorff(const PointCloud& a, const PointCloud& b);

// Exact optimal-assignment mean matched distance on equal-size
// subsamples (without replacement, deterministic for a seed). Both
// clouds must have at least `subsample` points.
real emd(const PointCloud& a, const PointCloud& b, int subsample, std::uint64_t seed);

// Minimal-cost perfect matching on a dense n x n cost matrix
// (row-major); returns the column assigned to each row. O(n^3).
std::vector<int> solve_assignment(const std::vector<real>& cost, int n);

struct MetricStats {
  real mean = 0;
  real stddev = 0;
};

struct MetricReport {
  MetricStats chamfer, mse, hausdorff, emd, msd;
  int n_points = 0;
  int n_repeats = 0;
  int emd_subsample = 0;
  std::uint64_t seed = 0;
};

// Appendix-style mesh evaluation: normalize each mesh to the unit
// sphere independently, then repeatedly sample point clouds and compute
// all five metrics; reports mean and (sample) standard deviation.
MetricReport evaluate_meshes(const TriangleMesh& ground_truth, const TriangleMesh& predicted,
                             int n_points = 20000, int repeats = 20, std::uint64_t seed = 0,
                             int emd_subsample = 1024);

}  // namespace trisdf
