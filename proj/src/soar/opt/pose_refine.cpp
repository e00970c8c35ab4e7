#include "soar/opt/pose_refine.hpp"

#include "soar/geom/rotation.hpp"
#include "soar/loss/robust.hpp"

#include <cmath>

namespace soar {

void PoseSequence::validate(const BodyTemplate& tmpl) const {
  SOAR_REQUIRE(!poses.empty(), "pose sequence has no frames");
  SOAR_REQUIRE(cameras.size() == poses.size(),
               "pose sequence needs one camera per frame");
  SOAR_REQUIRE(beta.size() == tmpl.shape_dim(),
               "beta length does not match the template shape basis");
  for (const Pose& p : poses) {
    SOAR_REQUIRE(p.theta.rows() == tmpl.joint_count() && p.theta.cols() == 3,
                 "pose theta must be joints x 3");
  }
  for (const Camera& c : cameras) c.validate();
}

void KeypointObservations::validate(const PoseSequence& seq,
                                    const BodyTemplate& tmpl) const {
  SOAR_REQUIRE(pixels.size() == seq.poses.size() &&
                   confidence.size() == seq.poses.size(),
               "keypoint observations must cover every frame");
  for (size_t t = 0; t < pixels.size(); ++t) {
    SOAR_REQUIRE(pixels[t].rows() == tmpl.keypoint_count() && pixels[t].cols() == 2,
                 "keypoint pixels must be K x 2");
    SOAR_REQUIRE(confidence[t].size() == tmpl.keypoint_count(),
                 "keypoint confidences must be length K");
    SOAR_REQUIRE((confidence[t].array() >= 0.0).all(),
                 "keypoint confidences must be nonnegative");
  }
}

void PoseRefinementConfig::validate() const {
  SOAR_REQUIRE(lambda_data >= 0.0 && lambda_smooth >= 0.0 && lambda_preserve >= 0.0,
               "pose refinement weights must be nonnegative");
  SOAR_REQUIRE(learning_rate > 0.0, "pose refinement learning rate must be positive");
  SOAR_REQUIRE(epochs >= 0, "pose refinement epochs must be nonnegative");
}

VecX pack_sequence(const PoseSequence& seq) {
  const Eigen::Index joints = seq.poses.empty() ? 0 : seq.poses[0].theta.rows();
  const Eigen::Index per_frame = joints * 3 + 3;
  VecX x(seq.beta.size() + per_frame * static_cast<Eigen::Index>(seq.poses.size()));
  x.head(seq.beta.size()) = seq.beta;
  Eigen::Index off = seq.beta.size();
  for (const Pose& p : seq.poses) {
    for (Eigen::Index j = 0; j < joints; ++j)
      x.segment<3>(off + 3 * j) = p.theta.row(j).transpose();
    x.segment<3>(off + 3 * joints) = p.translation;
    off += per_frame;
  }
  return x;
}

void unpack_sequence(const VecX& x, PoseSequence& seq) {
  const Eigen::Index joints = seq.poses.empty() ? 0 : seq.poses[0].theta.rows();
  const Eigen::Index per_frame = joints * 3 + 3;
  SOAR_REQUIRE(x.size() == seq.beta.size() +
                               per_frame * static_cast<Eigen::Index>(seq.poses.size()),
               "packed vector does not match the sequence layout");
  seq.beta = x.head(seq.beta.size());
  Eigen::Index off = seq.beta.size();
  for (Pose& p : seq.poses) {
    for (Eigen::Index j = 0; j < joints; ++j)
      p.theta.row(j) = x.segment<3>(off + 3 * j).transpose();
    p.translation = x.segment<3>(off + 3 * joints);
    off += per_frame;
  }
}

double pose_refinement_energy(const PoseSequence& seq, const PoseSequence& init,
                              const KeypointObservations& obs,
                              const BodyTemplate& tmpl,
                              const PoseRefinementConfig& config, VecX* grad) {
  const int frames = seq.frame_count();
  const Eigen::Index joints = tmpl.joint_count();
  const Eigen::Index per_frame = joints * 3 + 3;
  const Eigen::Index beta_n = seq.beta.size();
  if (grad) grad->setZero(beta_n + per_frame * frames);

  const auto theta_at = [&](Eigen::Index t, Eigen::Index j) -> Eigen::Index {
    return beta_n + per_frame * t + 3 * j;
  };

  double energy = 0.0;

  // Data: confidence-weighted Geman-McClure on keypoint reprojection error.
  if (config.lambda_data > 0.0) {
    for (int t = 0; t < frames; ++t) {
      const Camera& cam = seq.cameras[t];
      const double sigma = config.robust_sigma > 0.0
                               ? config.robust_sigma
                               : keypoint_sigma(cam.width, cam.height);
      const KeypointProjection proj =
          regress_keypoints(tmpl, seq.beta, seq.poses[t], cam);
      std::vector<Vec2> dpixels(proj.pixels.size(), Vec2::Zero());
      bool any = false;
      for (size_t k = 0; k < proj.pixels.size(); ++k) {
        const double psi = obs.confidence[t][static_cast<Eigen::Index>(k)];
        if (psi <= 0.0 || !proj.valid[k]) continue;
        VecX r(2), dr;
        r << proj.pixels[k].x() - obs.pixels[t](static_cast<Eigen::Index>(k), 0),
            proj.pixels[k].y() - obs.pixels[t](static_cast<Eigen::Index>(k), 1);
        energy += config.lambda_data * psi * geman_mcclure(r, sigma, grad ? &dr : nullptr);
        if (grad) dpixels[k] = config.lambda_data * psi * Vec2(dr[0], dr[1]);
        any = true;
      }
      if (grad && any) {
        const KeypointBackward kb =
            regress_keypoints_backward(tmpl, seq.beta, seq.poses[t], cam, dpixels);
        grad->head(beta_n) += kb.dbeta;
        for (Eigen::Index j = 0; j < joints; ++j)
          grad->segment<3>(theta_at(t, j)) += kb.dtheta.row(j).transpose();
        grad->segment<3>(theta_at(t, joints)) += kb.dtranslation;
      }
    }
  }

  // Smoothness: || R_{t-1}^T R_t - I ||_F^2 per joint. The squared form keeps
  // the energy differentiable when consecutive rotations coincide.
  if (config.lambda_smooth > 0.0) {
    for (int t = 1; t < frames; ++t) {
      for (Eigen::Index j = 0; j < joints; ++j) {
        const Mat3 ra = rodrigues(seq.poses[t - 1].theta.row(j).transpose());
        const Mat3 rb = rodrigues(seq.poses[t].theta.row(j).transpose());
        const Mat3 a = ra.transpose() * rb - Mat3::Identity();
        energy += config.lambda_smooth * a.squaredNorm();
        if (grad) {
          const Mat3 da = 2.0 * config.lambda_smooth * a;
          grad->segment<3>(theta_at(t - 1, j)) += rodrigues_backward(
              seq.poses[t - 1].theta.row(j).transpose(), rb * da.transpose());
          grad->segment<3>(theta_at(t, j)) += rodrigues_backward(
              seq.poses[t].theta.row(j).transpose(), ra * da);
        }
      }
    }
  }

  // Preservation: squared drift from the initial estimates (beta and theta;
  // translations are left to the data term).
  if (config.lambda_preserve > 0.0) {
    const VecX db = seq.beta - init.beta;
    energy += config.lambda_preserve * db.squaredNorm();
    if (grad) grad->head(beta_n) += 2.0 * config.lambda_preserve * db;
    for (int t = 0; t < frames; ++t) {
      const MatX dt = seq.poses[t].theta - init.poses[t].theta;
      energy += config.lambda_preserve * dt.squaredNorm();
      if (grad)
        for (Eigen::Index j = 0; j < joints; ++j)
          grad->segment<3>(theta_at(t, j)) +=
              2.0 * config.lambda_preserve * dt.row(j).transpose();
    }
  }

  return energy;
}

PoseRefinementResult refine_pose(const PoseSequence& init,
                                 const KeypointObservations& obs,
                                 const BodyTemplate& tmpl,
                                 const PoseRefinementConfig& config) {
  config.validate();
  tmpl.validate();
  init.validate(tmpl);
  obs.validate(init, tmpl);

  PoseRefinementResult out;
  out.sequence = init;

  LbfgsConfig lcfg;
  lcfg.max_iters = config.epochs;
  lcfg.step_scale = config.learning_rate;
  const LbfgsObjective objective = [&](const VecX& x, VecX& g) {
    unpack_sequence(x, out.sequence);
    const double e =
        pose_refinement_energy(out.sequence, init, obs, tmpl, config, &g);
    SOAR_NUMERIC_CHECK(std::isfinite(e), "pose refinement energy diverged");
    return e;
  };

  const LbfgsResult res = lbfgs_minimize(objective, pack_sequence(init), lcfg);
  unpack_sequence(res.x, out.sequence);
  out.initial_energy = res.energies.front();
  out.final_energy = res.value;
  out.iterations = res.iterations;
  out.status = res.status;
  return out;
}

}  // namespace soar
