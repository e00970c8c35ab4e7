#include "soar/body/keypoints.hpp"

namespace soar {

namespace {

Mat34 vertex_blend(const BodyTemplate& tmpl, const BoneTransforms& bones, int v) {
  Mat34 m = Mat34::Zero();
  for (int j = 0; j < tmpl.joint_count(); ++j) {
    const double w = tmpl.skin_weights(v, j);
    if (w != 0.0) m += w * bones[j];
  }
  return m;
}

}  // namespace

KeypointProjection regress_keypoints(const BodyTemplate& tmpl, const VecX& beta,
                                     const Pose& pose, const Camera& camera) {
  camera.validate();
  const BoneTransforms bones = bone_transforms(tmpl, beta, pose);
  const std::vector<Vec3> shaped = tmpl.shaped_vertices(beta);

  KeypointProjection out;
  out.pixels.resize(tmpl.keypoint_count(), Vec2::Zero());
  out.valid.resize(tmpl.keypoint_count(), 0);
  for (int k = 0; k < tmpl.keypoint_count(); ++k) {
    Vec3 p3 = Vec3::Zero();
    for (const auto& [v, w] : tmpl.keypoint_regressor[k].terms)
      p3 += w * apply_rigid(vertex_blend(tmpl, bones, v), shaped[v]);
    const Vec3 cam = camera.to_camera(p3);
    if (cam.z() > 1e-6) {
      out.valid[k] = 1;
      out.pixels[k] = camera.project_camera(cam);
    }
  }
  return out;
}

KeypointBackward regress_keypoints_backward(const BodyTemplate& tmpl, const VecX& beta,
                                            const Pose& pose, const Camera& camera,
                                            const std::vector<Vec2>& dpixels) {
  SOAR_REQUIRE(static_cast<int>(dpixels.size()) == tmpl.keypoint_count(),
               "dpixels length ", dpixels.size(), " != keypoint count ",
               tmpl.keypoint_count());
  const BoneTransforms bones = bone_transforms(tmpl, beta, pose);
  const std::vector<Vec3> shaped = tmpl.shaped_vertices(beta);

  std::vector<Mat34> dbones(bones.size(), Mat34::Zero());
  std::vector<Vec3> dvertex(tmpl.vertex_count(), Vec3::Zero());
  std::vector<char> touched(tmpl.vertex_count(), 0);

  const Mat3& kmat = camera.intrinsics;
  for (int k = 0; k < tmpl.keypoint_count(); ++k) {
    Vec3 p3 = Vec3::Zero();
    for (const auto& [v, w] : tmpl.keypoint_regressor[k].terms)
      p3 += w * apply_rigid(vertex_blend(tmpl, bones, v), shaped[v]);
    const Vec3 cam = camera.to_camera(p3);
    if (cam.z() <= 1e-6) continue;  // excluded from energies

    const Vec3 q = kmat * cam;
    const Vec3 du_dc = kmat.row(0).transpose() / q.z() -
                       (q.x() / (q.z() * q.z())) * kmat.row(2).transpose();
    const Vec3 dv_dc = kmat.row(1).transpose() / q.z() -
                       (q.y() / (q.z() * q.z())) * kmat.row(2).transpose();
    const Vec3 dcam = dpixels[k].x() * du_dc + dpixels[k].y() * dv_dc;
    const Vec3 dworld = camera.extrinsics.leftCols<3>().transpose() * dcam;

    for (const auto& [v, w] : tmpl.keypoint_regressor[k].terms) {
      const Vec3 dposed = w * dworld;
      const Mat34 m = vertex_blend(tmpl, bones, v);
      dvertex[v] += m.leftCols<3>().transpose() * dposed;
      touched[v] = 1;
      for (int j = 0; j < tmpl.joint_count(); ++j) {
        const double sw = tmpl.skin_weights(v, j);
        if (sw == 0.0) continue;
        dbones[j].leftCols<3>() += sw * dposed * shaped[v].transpose();
        dbones[j].col(3) += sw * dposed;
      }
    }
  }

  const BoneBackward bb = bone_transforms_backward(tmpl, beta, pose, dbones);
  KeypointBackward out;
  out.dtheta = bb.dtheta;
  out.dtranslation = bb.dtranslation;
  out.dbeta = bb.dbeta;
  for (int b = 0; b < tmpl.shape_dim(); ++b) {
    double acc = 0;
    for (int v = 0; v < tmpl.vertex_count(); ++v)
      if (touched[v]) acc += tmpl.vertex_shape_basis[b].row(v).dot(dvertex[v]);
    out.dbeta[b] += acc;
  }
  return out;
}

}  // namespace soar
