#include "soar/core/grid_knn.hpp"

#include <algorithm>
#include <cmath>

namespace soar {

namespace {

int clampi(int v, int lo, int hi) { return std::max(lo, std::min(hi, v)); }

}  // namespace

KnnGrid::KnnGrid(std::vector<Vec3> points) : points_(std::move(points)) {
  SOAR_REQUIRE(!points_.empty(), "knn grid needs at least one point");
  Vec3 lo = points_[0], hi = points_[0];
  for (const Vec3& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  origin_ = lo;
  const Vec3 ext = hi - lo;
  const double max_ext = std::max({ext.x(), ext.y(), ext.z(), 1e-9});
  // Aim for ~2 points per occupied cell along the largest axis.
  const double per_axis =
      std::ceil(std::cbrt(std::max(1.0, static_cast<double>(points_.size()) / 2.0)));
  cell_ = std::max(max_ext / per_axis, 1e-9);
  for (int a = 0; a < 3; ++a)
    n_[a] = clampi(static_cast<int>(ext[a] / cell_) + 1, 1, 1 << 10);

  cells_.assign(static_cast<size_t>(n_[0]) * n_[1] * n_[2], {});
  for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
    const Vec3 rel = points_[i] - origin_;
    int c[3];
    for (int a = 0; a < 3; ++a)
      c[a] = clampi(static_cast<int>(std::floor(rel[a] / cell_)), 0, n_[a] - 1);
    cells_[(static_cast<size_t>(c[2]) * n_[1] + c[1]) * n_[0] + c[0]].push_back(i);
  }
}

std::vector<int> KnnGrid::nearest(const Vec3& query, int k, int exclude) const {
  SOAR_REQUIRE(k >= 1, "knn query needs k >= 1");
  const Vec3 rel = query - origin_;
  int cq[3];
  for (int a = 0; a < 3; ++a) cq[a] = static_cast<int>(std::floor(rel[a] / cell_));

  int max_ring = 0;
  for (int a = 0; a < 3; ++a)
    max_ring = std::max({max_ring, std::abs(cq[a]), std::abs(n_[a] - 1 - cq[a])});

  std::vector<std::pair<double, int>> cand;
  for (int r = 0; r <= max_ring; ++r) {
    // Cells at Chebyshev distance exactly r from the query's cell.
    for (int dz = -r; dz <= r; ++dz) {
      const int z = cq[2] + dz;
      if (z < 0 || z >= n_[2]) continue;
      for (int dy = -r; dy <= r; ++dy) {
        const int y = cq[1] + dy;
        if (y < 0 || y >= n_[1]) continue;
        const bool face = std::abs(dz) == r || std::abs(dy) == r;
        const int step = face ? 1 : 2 * r;
        for (int dx = -r; dx <= r; dx += std::max(1, step)) {
          const int x = cq[0] + dx;
          if (x < 0 || x >= n_[0]) continue;
          const auto& bucket = cells_[(static_cast<size_t>(z) * n_[1] + y) * n_[0] + x];
          for (int idx : bucket) {
            if (idx == exclude) continue;
            cand.emplace_back((points_[idx] - query).squaredNorm(), idx);
          }
        }
      }
    }
    if (static_cast<int>(cand.size()) >= k) {
      std::nth_element(cand.begin(), cand.begin() + (k - 1), cand.end());
      // Unvisited cells lie at Chebyshev ring >= r+1, hence distance >= r*cell.
      if (std::sqrt(cand[k - 1].first) < r * cell_) break;
    }
  }

  const int kk = std::min<int>(k, static_cast<int>(cand.size()));
  std::partial_sort(cand.begin(), cand.begin() + kk, cand.end());
  std::vector<int> out(kk);
  for (int i = 0; i < kk; ++i) out[i] = cand[i].second;
  return out;
}

}  // namespace soar
