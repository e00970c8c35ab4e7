#include "soar/render/scene.hpp"

#include "soar/geom/rotation.hpp"

namespace soar {

RenderOutput SceneRenderer::forward(const SurfelCloud& cloud,
                                    const BoneTransforms& bones, const Camera& camera,
                                    const RenderRequest& request) {
  cloud.validate();
  SOAR_REQUIRE(cloud.bound(), "cloud has no skinning bindings");
  SOAR_REQUIRE(static_cast<Eigen::Index>(bones.size()) == cloud.binding_weights.cols(),
               "bone count ", bones.size(), " does not match binding width ",
               cloud.binding_weights.cols());

  cloud_ = &cloud;
  bones_ = bones;
  const Eigen::Index n = cloud.size();
  rot0_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) rot0_[i] = quat_to_matrix(cloud.orientations[i]);
  skinned_ = skin_points(cloud.positions, rot0_, cloud.binding_weights, bones);

  std::vector<double> scales;
  std::vector<Vec3> colors;
  query_attributes(cloud, &scales, &colors);

  posed_.positions = skinned_.positions;
  posed_.rotations = skinned_.rotations;
  posed_.scales = std::move(scales);
  posed_.colors = std::move(colors);
  posed_.occlusion = cloud.occlusion;

  have_forward_ = true;
  return raster_.forward(posed_, camera, request);
}

SceneGradients SceneRenderer::backward(const RenderOutput& output_grads) const {
  SOAR_REQUIRE(have_forward_, "scene backward without a forward pass");
  const RenderGradients rg = raster_.backward(output_grads);
  const Eigen::Index n = cloud_->size();

  const SkinBackward sb =
      skin_points_backward(cloud_->positions, rot0_, cloud_->binding_weights, bones_,
                           skinned_, rg.dpositions, rg.drotations);

  SceneGradients out;
  out.dpositions = sb.dpositions;
  out.drotations.resize(n);
  out.dfield = VecX::Zero(cloud_->field->param_count());
  out.docclusion = rg.docclusion;
  out.dbones = sb.dbones;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.drotations[i] = tangent_gradient(rot0_[i], sb.drotations[i]);
    out.dpositions[i] += cloud_->field->query_backward(
        cloud_->positions[i], rg.dscales[i], rg.dcolors[i], out.dfield);
  }
  return out;
}

RenderOutput render_scene(const SurfelCloud& cloud, const BoneTransforms& bones,
                          const Camera& camera, const RenderRequest& request) {
  SceneRenderer r;
  return r.forward(cloud, bones, camera, request);
}

}  // namespace soar
