#include "soar/body/kinematics.hpp"

#include "soar/geom/rotation.hpp"

namespace soar {

namespace {

struct FkState {
  std::vector<Vec3> joints;
  std::vector<Mat3> local;   // rodrigues(theta_j)
  std::vector<Mat3> world_r;
  std::vector<Vec3> world_t;
  std::vector<int> order;
};

FkState run_fk(const BodyTemplate& tmpl, const VecX& beta, const Pose& pose) {
  const int j = tmpl.joint_count();
  SOAR_REQUIRE(pose.theta.rows() == j && pose.theta.cols() == 3, "pose has ",
               pose.theta.rows(), "x", pose.theta.cols(), " angles, expected ", j, "x3");
  FkState s;
  s.joints = tmpl.shaped_joints(beta);
  s.local.resize(j);
  s.world_r.resize(j);
  s.world_t.resize(j);
  s.order = tmpl.topo_order();
  for (int idx : s.order) {
    s.local[idx] = rodrigues(pose.theta.row(idx).transpose());
    const int p = tmpl.parents[idx];
    if (p == -1) {
      s.world_r[idx] = s.local[idx];
      s.world_t[idx] = s.joints[idx];
    } else {
      s.world_r[idx] = s.world_r[p] * s.local[idx];
      s.world_t[idx] = s.world_r[p] * (s.joints[idx] - s.joints[p]) + s.world_t[p];
    }
  }
  return s;
}

}  // namespace

BoneTransforms bone_transforms(const BodyTemplate& tmpl, const VecX& beta,
                               const Pose& pose) {
  const FkState s = run_fk(tmpl, beta, pose);
  BoneTransforms bones(tmpl.joint_count());
  for (int j = 0; j < tmpl.joint_count(); ++j) {
    bones[j].leftCols<3>() = s.world_r[j];
    bones[j].col(3) = s.world_t[j] - s.world_r[j] * s.joints[j] + pose.translation;
  }
  return bones;
}

BoneBackward bone_transforms_backward(const BodyTemplate& tmpl, const VecX& beta,
                                      const Pose& pose,
                                      const std::vector<Mat34>& dbones) {
  const int j = tmpl.joint_count();
  SOAR_REQUIRE(static_cast<int>(dbones.size()) == j, "dbones has ", dbones.size(),
               " entries, expected ", j);
  const FkState s = run_fk(tmpl, beta, pose);

  BoneBackward out;
  out.dtheta = MatX::Zero(j, 3);
  out.dbeta = VecX::Zero(tmpl.shape_dim());

  std::vector<Mat3> dworld_r(j, Mat3::Zero());
  std::vector<Vec3> dworld_t(j, Vec3::Zero());
  std::vector<Vec3> djoints(j, Vec3::Zero());

  // B_j = [W_j | t_j - W_j joint_j + translation].
  for (int i = 0; i < j; ++i) {
    const Mat3 dr = dbones[i].leftCols<3>();
    const Vec3 dt = dbones[i].col(3);
    dworld_r[i] += dr - dt * s.joints[i].transpose();
    dworld_t[i] += dt;
    djoints[i] -= s.world_r[i].transpose() * dt;
    out.dtranslation += dt;
  }

  // Children before parents.
  for (auto it = s.order.rbegin(); it != s.order.rend(); ++it) {
    const int i = *it;
    const int p = tmpl.parents[i];
    Mat3 dlocal;
    Vec3 doffset;
    if (p == -1) {
      dlocal = dworld_r[i];
      doffset = dworld_t[i];
      djoints[i] += doffset;
    } else {
      const Vec3 offset = s.joints[i] - s.joints[p];
      dworld_r[p] += dworld_r[i] * s.local[i].transpose() +
                     dworld_t[i] * offset.transpose();
      dworld_t[p] += dworld_t[i];
      dlocal = s.world_r[p].transpose() * dworld_r[i];
      doffset = s.world_r[p].transpose() * dworld_t[i];
      djoints[i] += doffset;
      djoints[p] -= doffset;
    }
    out.dtheta.row(i) =
        rodrigues_backward(pose.theta.row(i).transpose(), dlocal).transpose();
  }

  for (std::size_t b = 0; b < tmpl.joint_shape_basis.size(); ++b) {
    double acc = 0;
    for (int i = 0; i < j; ++i)
      acc += tmpl.joint_shape_basis[b].row(i).dot(djoints[i]);
    out.dbeta[b] = acc;
  }
  return out;
}

}  // namespace soar
