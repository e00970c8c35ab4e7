#pragma once

#include "soar/core/common.hpp"

namespace soar {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias-corrected moments for one parameter group. A gradient
// containing non-finite values skips the whole group's update; the skip
// count is exposed for logging.
class Adam {
 public:
  Adam(Eigen::Index size, const AdamConfig& config)
      : cfg_(config), m_(VecX::Zero(size)), v_(VecX::Zero(size)) {}

  void step(VecX& params, const VecX& grad);

  int steps_taken() const { return t_; }
  int steps_skipped() const { return skipped_; }
  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

  // Checkpointing access.
  const VecX& first_moment() const { return m_; }
  const VecX& second_moment() const { return v_; }
  void restore(const VecX& m, const VecX& v, int t, int skipped);

 private:
  AdamConfig cfg_;
  VecX m_, v_;
  int t_ = 0;
  int skipped_ = 0;
};

}  // namespace soar
