#pragma once

#include "soar/core/common.hpp"

namespace soar {

// Exact k-nearest-neighbor queries over a fixed point set, backed by a
// uniform grid. Distance ties break by point index, so results are
// deterministic and match a brute-force scan exactly.
class KnnGrid {
 public:
  explicit KnnGrid(std::vector<Vec3> points);

  // Indices of the k nearest points to `query`, nearest first. Pass the
  // query's own index as `exclude` for neighbor-of-point queries. Returns
  // fewer than k entries only when the set runs out of points.
  std::vector<int> nearest(const Vec3& query, int k, int exclude = -1) const;

  const std::vector<Vec3>& points() const { return points_; }

 private:
  std::vector<Vec3> points_;
  Vec3 origin_ = Vec3::Zero();
  double cell_ = 1.0;
  int n_[3] = {1, 1, 1};
  std::vector<std::vector<int>> cells_;
};

}  // namespace soar
