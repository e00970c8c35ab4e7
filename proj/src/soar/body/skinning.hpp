#pragma once

#include "soar/body/kinematics.hpp"

namespace soar {

// Binding of free points to the template's skinning weights: each point takes
// the inverse-distance-weighted average of its K nearest template vertices'
// weight rows. Returns an N x J matrix with rows summing to 1.
MatX bind_weights(const std::vector<Vec3>& points, const std::vector<Vec3>& vertices,
                  const MatX& skin_weights, int k = 30);

struct SkinnedPoints {
  std::vector<Vec3> positions;
  std::vector<Mat3> rotations;       // re-orthonormalized frames
  std::vector<Mat34> blended;        // per-point blended bone transform
  std::vector<Mat3> pre_projection;  // blended rotation block * R0
};

// [R_t | mu_t] = (sum_j w_j B_j) [R_0 | mu_0], rotation re-orthonormalized.
SkinnedPoints skin_points(const std::vector<Vec3>& positions,
                          const std::vector<Mat3>& rotations, const MatX& binding,
                          const BoneTransforms& bones);

// Positions only; used for template vertices (keypoints, silhouettes).
std::vector<Vec3> skin_positions(const std::vector<Vec3>& positions,
                                 const MatX& binding, const BoneTransforms& bones);

struct SkinBackward {
  std::vector<Vec3> dpositions;
  std::vector<Mat3> drotations;
  std::vector<Mat34> dbones;  // feed into bone_transforms_backward
};

// Pullback of gradients on posed positions/rotations. Either gradient list
// may be empty (treated as zero).
SkinBackward skin_points_backward(const std::vector<Vec3>& positions,
                                  const std::vector<Mat3>& rotations,
                                  const MatX& binding, const BoneTransforms& bones,
                                  const SkinnedPoints& forward,
                                  const std::vector<Vec3>& dposed_positions,
                                  const std::vector<Mat3>& dposed_rotations);

}  // namespace soar
