#pragma once

#include "soar/body/template.hpp"

namespace soar {

struct Pose {
  MatX theta;  // J x 3 axis-angle
  Vec3 translation = Vec3::Zero();

  static Pose rest(int joints) {
    Pose p;
    p.theta = MatX::Zero(joints, 3);
    return p;
  }
};

// Per-joint rigid maps from canonical-pose coordinates to posed coordinates;
// rest pose yields identities.
using BoneTransforms = std::vector<Mat34>;

BoneTransforms bone_transforms(const BodyTemplate& tmpl, const VecX& beta,
                               const Pose& pose);

struct BoneBackward {
  MatX dtheta;  // J x 3
  Vec3 dtranslation = Vec3::Zero();
  VecX dbeta;   // via the joint shape basis only
};

// Pullback of per-bone gradients onto pose and shape parameters.
BoneBackward bone_transforms_backward(const BodyTemplate& tmpl, const VecX& beta,
                                      const Pose& pose,
                                      const std::vector<Mat34>& dbones);

inline Vec3 apply_rigid(const Mat34& t, const Vec3& p) {
  return t.leftCols<3>() * p + t.col(3);
}

}  // namespace soar
