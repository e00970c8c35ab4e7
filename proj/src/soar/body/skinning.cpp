#include "soar/body/skinning.hpp"

#include "soar/core/grid_knn.hpp"
#include "soar/geom/rotation.hpp"

namespace soar {

MatX bind_weights(const std::vector<Vec3>& points, const std::vector<Vec3>& vertices,
                  const MatX& skin_weights, int k) {
  SOAR_REQUIRE(k >= 1 && k <= static_cast<int>(vertices.size()),
               "binding needs 1 <= K <= vertex count, got K=", k, " with ",
               vertices.size(), " vertices");
  SOAR_REQUIRE(skin_weights.rows() == static_cast<Eigen::Index>(vertices.size()),
               "skin weight rows != vertex count");
  const KnnGrid grid(vertices);
  MatX out = MatX::Zero(points.size(), skin_weights.cols());
  constexpr double kEps = 1e-8;  // meters; lets coincident vertices dominate
  parallel_for(static_cast<std::int64_t>(points.size()),
               [&](std::int64_t begin, std::int64_t end) {
                 for (std::int64_t i = begin; i < end; ++i) {
                   const auto nn = grid.nearest(points[i], k);
                   double norm = 0;
                   for (int v : nn) norm += 1.0 / ((points[i] - vertices[v]).norm() + kEps);
                   for (int v : nn) {
                     const double a =
                         1.0 / ((points[i] - vertices[v]).norm() + kEps) / norm;
                     out.row(i) += a * skin_weights.row(v);
                   }
                 }
               });
  return out;
}

namespace {

Mat34 blend_bones(const MatX& binding, const BoneTransforms& bones, std::int64_t row) {
  Mat34 m = Mat34::Zero();
  for (int j = 0; j < binding.cols(); ++j) {
    const double w = binding(row, j);
    if (w != 0.0) m += w * bones[j];
  }
  return m;
}

}  // namespace

SkinnedPoints skin_points(const std::vector<Vec3>& positions,
                          const std::vector<Mat3>& rotations, const MatX& binding,
                          const BoneTransforms& bones) {
  const std::int64_t n = static_cast<std::int64_t>(positions.size());
  SOAR_REQUIRE(rotations.size() == positions.size(), "positions/rotations length mismatch");
  SOAR_REQUIRE(binding.rows() == n, "binding rows != point count");
  SkinnedPoints out;
  out.positions.resize(n);
  out.rotations.resize(n);
  out.blended.resize(n);
  out.pre_projection.resize(n);
  parallel_for(n, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      const Mat34 m = blend_bones(binding, bones, i);
      out.blended[i] = m;
      out.positions[i] = apply_rigid(m, positions[i]);
      out.pre_projection[i] = m.leftCols<3>() * rotations[i];
      out.rotations[i] = orthonormalize(out.pre_projection[i]);
    }
  });
  return out;
}

std::vector<Vec3> skin_positions(const std::vector<Vec3>& positions,
                                 const MatX& binding, const BoneTransforms& bones) {
  const std::int64_t n = static_cast<std::int64_t>(positions.size());
  SOAR_REQUIRE(binding.rows() == n, "binding rows != point count");
  std::vector<Vec3> out(n);
  parallel_for(n, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      out[i] = apply_rigid(blend_bones(binding, bones, i), positions[i]);
  });
  return out;
}

SkinBackward skin_points_backward(const std::vector<Vec3>& positions,
                                  const std::vector<Mat3>& rotations,
                                  const MatX& binding, const BoneTransforms& bones,
                                  const SkinnedPoints& forward,
                                  const std::vector<Vec3>& dposed_positions,
                                  const std::vector<Mat3>& dposed_rotations) {
  const std::size_t n = positions.size();
  const bool has_dp = !dposed_positions.empty();
  const bool has_dr = !dposed_rotations.empty();
  SOAR_REQUIRE(!has_dp || dposed_positions.size() == n, "dpositions length mismatch");
  SOAR_REQUIRE(!has_dr || dposed_rotations.size() == n, "drotations length mismatch");

  SkinBackward out;
  out.dpositions.assign(n, Vec3::Zero());
  out.drotations.assign(n, Mat3::Zero());
  out.dbones.assign(bones.size(), Mat34::Zero());

  for (std::size_t i = 0; i < n; ++i) {
    const Mat34& m = forward.blended[i];
    Mat34 dm = Mat34::Zero();
    if (has_dp) {
      const Vec3& dp = dposed_positions[i];
      out.dpositions[i] += m.leftCols<3>().transpose() * dp;
      dm.leftCols<3>() += dp * positions[i].transpose();
      dm.col(3) += dp;
    }
    if (has_dr) {
      const Mat3 dpre =
          orthonormalize_backward(forward.pre_projection[i], dposed_rotations[i]);
      dm.leftCols<3>() += dpre * rotations[i].transpose();
      out.drotations[i] += m.leftCols<3>().transpose() * dpre;
    }
    for (int j = 0; j < binding.cols(); ++j) {
      const double w = binding(i, j);
      if (w != 0.0) out.dbones[j] += w * dm;
    }
  }
  return out;
}

}  // namespace soar
