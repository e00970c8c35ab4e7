#pragma once

#include "soar/body/skinning.hpp"
#include "soar/render/raster.hpp"
#include "soar/surfel/cloud.hpp"

namespace soar {

// Rendering-loss gradients pulled back through skinning and the attribute
// field to the parameters the trainer actually steps.
struct SceneGradients {
  std::vector<Vec3> dpositions;  // mu_0: skinning term plus field sampling term
  std::vector<Vec3> drotations;  // so(3) right tangent at each R_0
  VecX dfield;                   // flat field parameters
  VecX docclusion;
  std::vector<Mat34> dbones;  // per joint; bone_transforms_backward maps to theta/beta
};

// Poses the cloud with the given bones, reads scale/color from the field and
// rasterizes. The cloud must stay alive between forward and backward.
class SceneRenderer {
 public:
  RenderOutput forward(const SurfelCloud& cloud, const BoneTransforms& bones,
                       const Camera& camera, const RenderRequest& request);
  SceneGradients backward(const RenderOutput& output_grads) const;

  const PosedSurfels& posed() const { return posed_; }

 private:
  Rasterizer raster_;
  const SurfelCloud* cloud_ = nullptr;
  BoneTransforms bones_;
  std::vector<Mat3> rot0_;
  SkinnedPoints skinned_;
  PosedSurfels posed_;
  bool have_forward_ = false;
};

RenderOutput render_scene(const SurfelCloud& cloud, const BoneTransforms& bones,
                          const Camera& camera, const RenderRequest& request);

}  // namespace soar
