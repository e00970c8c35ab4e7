#pragma once

#include "soar/body/skinning.hpp"
#include "soar/render/camera.hpp"

namespace soar {

struct KeypointProjection {
  std::vector<Vec2> pixels;
  std::vector<char> valid;  // false when the regressed point is behind the camera
};

// Poses the template vertices referenced by the regressor, regresses 3D
// keypoints, and projects them.
KeypointProjection regress_keypoints(const BodyTemplate& tmpl, const VecX& beta,
                                     const Pose& pose, const Camera& camera);

struct KeypointBackward {
  MatX dtheta;
  Vec3 dtranslation = Vec3::Zero();
  VecX dbeta;
};

// Pullback of per-keypoint pixel gradients; invalid keypoints contribute
// nothing regardless of their gradient entries.
KeypointBackward regress_keypoints_backward(const BodyTemplate& tmpl, const VecX& beta,
                                            const Pose& pose, const Camera& camera,
                                            const std::vector<Vec2>& dpixels);

}  // namespace soar
