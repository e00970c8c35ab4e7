#pragma once

#include "soar/body/keypoints.hpp"
#include "soar/opt/lbfgs.hpp"

namespace soar {

// Per-frame body poses with the shared shape and cameras they were estimated
// under. Frames are consecutive video frames; index order is time order.
struct PoseSequence {
  VecX beta;
  std::vector<Pose> poses;
  std::vector<Camera> cameras;

  int frame_count() const { return static_cast<int>(poses.size()); }
  void validate(const BodyTemplate& tmpl) const;
};

// Detected 2D keypoints with confidences, one row set per frame. A keypoint
// with zero confidence is ignored entirely.
struct KeypointObservations {
  std::vector<MatX> pixels;      // frame -> K x 2
  std::vector<VecX> confidence;  // frame -> K

  void validate(const PoseSequence& seq, const BodyTemplate& tmpl) const;
};

struct PoseRefinementConfig {
  double lambda_data = 100.0;
  double lambda_smooth = 10000.0;
  double lambda_preserve = 60.0;
  double learning_rate = 1.0;
  int epochs = 40;
  // Geman-McClure scale in pixels; <= 0 derives it from each camera's
  // resolution (50 px at 512 square, scaled with the diagonal).
  double robust_sigma = 0.0;

  void validate() const;
};

struct PoseRefinementResult {
  PoseSequence sequence;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  int iterations = 0;
  LbfgsStatus status = LbfgsStatus::kConverged;
};

// Packs (beta, per-frame theta and translation) into one vector and back.
VecX pack_sequence(const PoseSequence& seq);
void unpack_sequence(const VecX& x, PoseSequence& seq);

// The Eq-style energy: robustified keypoint reprojection, squared-Frobenius
// rotation smoothness between consecutive frames, and squared preservation
// towards the initial estimates. `grad` is w.r.t. pack_sequence order.
double pose_refinement_energy(const PoseSequence& seq, const PoseSequence& init,
                              const KeypointObservations& obs,
                              const BodyTemplate& tmpl,
                              const PoseRefinementConfig& config,
                              VecX* grad = nullptr);

PoseRefinementResult refine_pose(const PoseSequence& init,
                                 const KeypointObservations& obs,
                                 const BodyTemplate& tmpl,
                                 const PoseRefinementConfig& config = {});

}  // namespace soar
