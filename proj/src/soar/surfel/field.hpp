#pragma once

#include "soar/core/common.hpp"
#include "soar/core/rng.hpp"

namespace soar {

struct FieldConfig {
  int levels = 16;
  int max_entries = 1 << 19;  // per-level table cap; levels below it are dense
  int features = 2;
  int base_resolution = 16;
  int max_resolution = 2048;
  int hidden = 64;  // two hidden layers per head
  Vec3 box_lo = Vec3(-1, -1, -1);
  Vec3 box_hi = Vec3(1, 1, 1);

  void validate() const;
};

// Multiresolution hash-grid encoding shared by two small MLP heads mapping a
// canonical-space position to a surfel scale (softplus, strictly positive)
// and color (sigmoid, componentwise in (0,1)). All parameters live in one
// flat vector so optimizers and checkpoints treat the field uniformly.
class NeuralField {
 public:
  NeuralField(const FieldConfig& config, Rng& rng);

  const FieldConfig& config() const { return cfg_; }
  const VecX& params() const { return params_; }
  VecX& params() { return params_; }
  Eigen::Index param_count() const { return params_.size(); }

  struct Output {
    double scale;
    Vec3 color;
  };

  Output query(const Vec3& p) const;
  void query_many(const std::vector<Vec3>& pts, std::vector<double>* scales,
                  std::vector<Vec3>* colors) const;

  // Pullback of (dscale, dcolor): accumulates into dparams (must match
  // param_count) and returns the gradient w.r.t. the query position.
  Vec3 query_backward(const Vec3& p, double dscale, const Vec3& dcolor,
                      VecX& dparams) const;

  // Level resolutions, coarse to fine (for the locality test).
  const std::vector<int>& resolutions() const { return res_; }
  // Parameter span of one level's feature table.
  std::pair<Eigen::Index, Eigen::Index> level_span(int level) const;
  bool level_dense(int level) const { return dense_[level]; }
  // Flat entry index of a grid corner within one level's table (dense layout
  // or hashed), exposed so tests can enumerate an entry's spatial footprint.
  Eigen::Index level_entry(int level, int x, int y, int z) const;

  int encoding_dim() const { return cfg_.levels * cfg_.features; }

 private:
  struct HeadSpan {
    Eigen::Index w1, b1, w2, b2, w3, b3;  // offsets into params_
    int in, hidden, out;
  };

  void encode(const Vec3& p, VecX& enc, MatX* denc_dp) const;
  VecX head_forward(const HeadSpan& h, const VecX& x, VecX* a1, VecX* a2) const;
  VecX head_backward(const HeadSpan& h, const VecX& x, const VecX& a1, const VecX& a2,
                     const VecX& dout, VecX& dparams) const;

  FieldConfig cfg_;
  std::vector<int> res_;
  std::vector<Eigen::Index> offsets_;  // per-level feature table offset
  std::vector<Eigen::Index> sizes_;    // per-level entry count
  std::vector<bool> dense_;
  HeadSpan scale_head_, color_head_;
  VecX params_;
};

double softplus(double x);
double sigmoid(double x);

struct PretrainConfig {
  double lr = 1e-2;
  int batch = 4096;
};

// Fits the scale head to per-position labels (log-space squared error, Adam)
// so the field starts near the 3-NN spacing instead of at random. Color is
// left at initialization; there are no color labels to fit. steps <= 0 leaves
// the field bitwise unchanged and draws nothing from rng.
void pretrain_field(NeuralField& field, const std::vector<Vec3>& positions,
                    const std::vector<double>& scale_labels, int steps, Rng& rng,
                    const PretrainConfig& config = {});

}  // namespace soar
