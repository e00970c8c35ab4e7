#include "soar/surfel/field.hpp"

#include <algorithm>
#include <cmath>

#include "soar/opt/adam.hpp"
#include "soar/opt/guards.hpp"

namespace soar {

double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void FieldConfig::validate() const {
  SOAR_REQUIRE(levels >= 1 && features >= 1 && hidden >= 1, "field config degenerate");
  SOAR_REQUIRE(base_resolution >= 1 && max_resolution >= base_resolution,
               "field resolutions must satisfy 1 <= base <= max");
  SOAR_REQUIRE(max_entries >= 8, "field table too small");
  SOAR_REQUIRE(((box_hi - box_lo).array() > 0).all(), "field box is empty");
}

NeuralField::NeuralField(const FieldConfig& config, Rng& rng) : cfg_(config) {
  cfg_.validate();
  const double growth =
      cfg_.levels > 1 ? std::exp(std::log(static_cast<double>(cfg_.max_resolution) /
                                          cfg_.base_resolution) /
                                 (cfg_.levels - 1))
                      : 1.0;
  Eigen::Index offset = 0;
  for (int l = 0; l < cfg_.levels; ++l) {
    // floor with a guard so exact powers (16 * 128^(15/15) = 2048) survive
    // round-off in pow.
    const int n = static_cast<int>(
        std::floor(cfg_.base_resolution * std::pow(growth, l) + 1e-9));
    res_.push_back(n);
    const std::int64_t corners = static_cast<std::int64_t>(n + 1) * (n + 1) * (n + 1);
    const bool dense = corners <= cfg_.max_entries;
    dense_.push_back(dense);
    const Eigen::Index entries = dense ? corners : cfg_.max_entries;
    sizes_.push_back(entries);
    offsets_.push_back(offset);
    offset += entries * cfg_.features;
  }

  const auto make_head = [&](int out) {
    HeadSpan h;
    h.in = encoding_dim();
    h.hidden = cfg_.hidden;
    h.out = out;
    h.w1 = offset;
    offset += static_cast<Eigen::Index>(h.hidden) * h.in;
    h.b1 = offset;
    offset += h.hidden;
    h.w2 = offset;
    offset += static_cast<Eigen::Index>(h.hidden) * h.hidden;
    h.b2 = offset;
    offset += h.hidden;
    h.w3 = offset;
    offset += static_cast<Eigen::Index>(h.out) * h.hidden;
    h.b3 = offset;
    offset += h.out;
    return h;
  };
  scale_head_ = make_head(1);
  color_head_ = make_head(3);

  params_ = VecX::Zero(offset);
  for (int l = 0; l < cfg_.levels; ++l) {
    const Eigen::Index count = sizes_[l] * cfg_.features;
    for (Eigen::Index i = 0; i < count; ++i)
      params_[offsets_[l] + i] = rng.uniform(-1e-4, 1e-4);
  }
  const auto init_head = [&](const HeadSpan& h) {
    const auto xavier = [&](Eigen::Index off, int rows, int cols) {
      const double a = std::sqrt(6.0 / (rows + cols));
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(rows) * cols; ++i)
        params_[off + i] = rng.uniform(-a, a);
    };
    xavier(h.w1, h.hidden, h.in);
    xavier(h.w2, h.hidden, h.hidden);
    xavier(h.w3, h.out, h.hidden);
  };
  init_head(scale_head_);
  init_head(color_head_);
}

std::pair<Eigen::Index, Eigen::Index> NeuralField::level_span(int level) const {
  return {offsets_[level], sizes_[level] * cfg_.features};
}

namespace {

std::int64_t corner_index(int x, int y, int z, int resolution, bool dense,
                          std::int64_t entries) {
  if (dense) {
    const std::int64_t n1 = resolution + 1;
    return (static_cast<std::int64_t>(z) * n1 + y) * n1 + x;
  }
  const std::uint64_t h = static_cast<std::uint64_t>(x) ^
                          (static_cast<std::uint64_t>(y) * 2654435761ull) ^
                          (static_cast<std::uint64_t>(z) * 805459861ull);
  return static_cast<std::int64_t>(h % static_cast<std::uint64_t>(entries));
}

}  // namespace

Eigen::Index NeuralField::level_entry(int level, int x, int y, int z) const {
  return corner_index(x, y, z, res_[level], dense_[level], sizes_[level]);
}

void NeuralField::encode(const Vec3& p, VecX& enc, MatX* denc_dp) const {
  enc.setZero(encoding_dim());
  if (denc_dp) denc_dp->setZero(encoding_dim(), 3);

  Vec3 u, du_dp = Vec3::Zero();
  for (int a = 0; a < 3; ++a) {
    const double extent = cfg_.box_hi[a] - cfg_.box_lo[a];
    double t = (p[a] - cfg_.box_lo[a]) / extent;
    if (t <= 0.0) t = 0.0;            // clamped: no position gradient
    else if (t >= 1.0) t = 1.0;
    else du_dp[a] = 1.0 / extent;
    u[a] = t;
  }

  const int F = cfg_.features;
  for (int l = 0; l < cfg_.levels; ++l) {
    const int n = res_[l];
    int cell[3];
    double frac[3], dfrac_dp[3];
    for (int a = 0; a < 3; ++a) {
      const double x = u[a] * n;
      cell[a] = std::min(static_cast<int>(x), n - 1);
      frac[a] = x - cell[a];
      dfrac_dp[a] = du_dp[a] * n;
    }
    const double* table = params_.data() + offsets_[l];
    for (int corner = 0; corner < 8; ++corner) {
      const int dx = corner & 1, dy = (corner >> 1) & 1, dz = (corner >> 2) & 1;
      const double wx = dx ? frac[0] : 1.0 - frac[0];
      const double wy = dy ? frac[1] : 1.0 - frac[1];
      const double wz = dz ? frac[2] : 1.0 - frac[2];
      const double w = wx * wy * wz;
      const std::int64_t idx =
          corner_index(cell[0] + dx, cell[1] + dy, cell[2] + dz, n, dense_[l], sizes_[l]);
      for (int f = 0; f < F; ++f) {
        const double feat = table[idx * F + f];
        enc[l * F + f] += w * feat;
        if (denc_dp) {
          (*denc_dp)(l * F + f, 0) += (dx ? 1.0 : -1.0) * wy * wz * dfrac_dp[0] * feat;
          (*denc_dp)(l * F + f, 1) += (dy ? 1.0 : -1.0) * wx * wz * dfrac_dp[1] * feat;
          (*denc_dp)(l * F + f, 2) += (dz ? 1.0 : -1.0) * wx * wy * dfrac_dp[2] * feat;
        }
      }
    }
  }
}

VecX NeuralField::head_forward(const HeadSpan& h, const VecX& x, VecX* a1,
                               VecX* a2) const {
  using CMap = Eigen::Map<const MatX>;
  using CVec = Eigen::Map<const VecX>;
  const double* p = params_.data();
  VecX z1 = CMap(p + h.w1, h.hidden, h.in) * x + CVec(p + h.b1, h.hidden);
  z1 = z1.cwiseMax(0.0);
  VecX z2 = CMap(p + h.w2, h.hidden, h.hidden) * z1 + CVec(p + h.b2, h.hidden);
  z2 = z2.cwiseMax(0.0);
  VecX out = CMap(p + h.w3, h.out, h.hidden) * z2 + CVec(p + h.b3, h.out);
  if (a1) *a1 = z1;
  if (a2) *a2 = z2;
  return out;
}

VecX NeuralField::head_backward(const HeadSpan& h, const VecX& x, const VecX& a1,
                                const VecX& a2, const VecX& dout,
                                VecX& dparams) const {
  using CMap = Eigen::Map<const MatX>;
  using MMap = Eigen::Map<MatX>;
  using MVec = Eigen::Map<VecX>;
  const double* p = params_.data();
  double* g = dparams.data();

  MMap(g + h.w3, h.out, h.hidden) += dout * a2.transpose();
  MVec(g + h.b3, h.out) += dout;
  VecX da2 = CMap(p + h.w3, h.out, h.hidden).transpose() * dout;
  da2 = (a2.array() > 0).select(da2, 0.0);

  MMap(g + h.w2, h.hidden, h.hidden) += da2 * a1.transpose();
  MVec(g + h.b2, h.hidden) += da2;
  VecX da1 = CMap(p + h.w2, h.hidden, h.hidden).transpose() * da2;
  da1 = (a1.array() > 0).select(da1, 0.0);

  MMap(g + h.w1, h.hidden, h.in) += da1 * x.transpose();
  MVec(g + h.b1, h.hidden) += da1;
  return CMap(p + h.w1, h.hidden, h.in).transpose() * da1;
}

NeuralField::Output NeuralField::query(const Vec3& p) const {
  VecX enc;
  encode(p, enc, nullptr);
  const VecX s_raw = head_forward(scale_head_, enc, nullptr, nullptr);
  const VecX c_raw = head_forward(color_head_, enc, nullptr, nullptr);
  Output out;
  // Clamped away from the range boundaries: softplus underflows to exactly 0
  // and sigmoid saturates to exactly 1 for |raw| beyond ~40, where the
  // activation gradient has already vanished, so the clamp never fights the
  // optimizer.
  out.scale = std::max(softplus(s_raw[0]), 1e-12);
  for (int i = 0; i < 3; ++i)
    out.color[i] = std::clamp(sigmoid(c_raw[i]), 1e-12, 1.0 - 1e-12);
  return out;
}

void NeuralField::query_many(const std::vector<Vec3>& pts, std::vector<double>* scales,
                             std::vector<Vec3>* colors) const {
  if (scales) scales->resize(pts.size());
  if (colors) colors->resize(pts.size());
  parallel_for(static_cast<std::int64_t>(pts.size()),
               [&](std::int64_t begin, std::int64_t end) {
                 for (std::int64_t i = begin; i < end; ++i) {
                   const Output o = query(pts[i]);
                   if (scales) (*scales)[i] = o.scale;
                   if (colors) (*colors)[i] = o.color;
                 }
               });
}

Vec3 NeuralField::query_backward(const Vec3& p, double dscale, const Vec3& dcolor,
                                 VecX& dparams) const {
  SOAR_REQUIRE(dparams.size() == params_.size(), "field gradient buffer mismatch");
  VecX enc;
  MatX denc_dp;
  encode(p, enc, &denc_dp);

  VecX denc = VecX::Zero(encoding_dim());
  {
    VecX a1, a2;
    const VecX s_raw = head_forward(scale_head_, enc, &a1, &a2);
    VecX dout(1);
    dout[0] = dscale * sigmoid(s_raw[0]);  // d softplus
    denc += head_backward(scale_head_, enc, a1, a2, dout, dparams);
  }
  {
    VecX a1, a2;
    const VecX c_raw = head_forward(color_head_, enc, &a1, &a2);
    VecX dout(3);
    for (int i = 0; i < 3; ++i) {
      const double s = sigmoid(c_raw[i]);
      dout[i] = dcolor[i] * s * (1.0 - s);
    }
    denc += head_backward(color_head_, enc, a1, a2, dout, dparams);
  }

  // Feature-table gradients mirror the interpolation weights.
  const int F = cfg_.features;
  Vec3 u, du_dp = Vec3::Zero();
  for (int a = 0; a < 3; ++a) {
    const double extent = cfg_.box_hi[a] - cfg_.box_lo[a];
    double t = (p[a] - cfg_.box_lo[a]) / extent;
    if (t <= 0.0) t = 0.0;
    else if (t >= 1.0) t = 1.0;
    else du_dp[a] = 1.0 / extent;
    u[a] = t;
  }
  for (int l = 0; l < cfg_.levels; ++l) {
    const int n = res_[l];
    int cell[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
      const double x = u[a] * n;
      cell[a] = std::min(static_cast<int>(x), n - 1);
      frac[a] = x - cell[a];
    }
    double* dtable = dparams.data() + offsets_[l];
    for (int corner = 0; corner < 8; ++corner) {
      const int dx = corner & 1, dy = (corner >> 1) & 1, dz = (corner >> 2) & 1;
      const double w = (dx ? frac[0] : 1.0 - frac[0]) * (dy ? frac[1] : 1.0 - frac[1]) *
                       (dz ? frac[2] : 1.0 - frac[2]);
      const std::int64_t idx =
          corner_index(cell[0] + dx, cell[1] + dy, cell[2] + dz, n, dense_[l], sizes_[l]);
      for (int f = 0; f < F; ++f) dtable[idx * F + f] += w * denc[l * F + f];
    }
  }

  return denc_dp.transpose() * denc;
}

void pretrain_field(NeuralField& field, const std::vector<Vec3>& positions,
                    const std::vector<double>& scale_labels, int steps, Rng& rng,
                    const PretrainConfig& config) {
  SOAR_REQUIRE(positions.size() == scale_labels.size() && !positions.empty(),
               "pretraining needs one scale label per position");
  for (double s : scale_labels)
    SOAR_REQUIRE(s > 0, "pretraining scale labels must be positive");
  if (steps <= 0) return;

  const std::int64_t n = static_cast<std::int64_t>(positions.size());
  const std::int64_t batch = std::min<std::int64_t>(config.batch, n);
  AdamConfig adam_cfg;
  adam_cfg.lr = config.lr;
  Adam opt(field.param_count(), adam_cfg);
  VecX grad(field.param_count());

  DivergenceGuard guard;
  for (int step = 0; step < steps; ++step) {
    grad.setZero();
    double loss = 0;
    for (std::int64_t b = 0; b < batch; ++b) {
      const std::int64_t i = batch == n ? b : static_cast<std::int64_t>(
                                                  rng.uniform_index(positions.size()));
      const double s = field.query(positions[i]).scale;
      const double r = std::log(s) - std::log(scale_labels[i]);
      loss += r * r;
      field.query_backward(positions[i], 2.0 * r / (s * batch), Vec3::Zero(), grad);
    }
    guard.observe(loss / batch);
    opt.step(field.params(), grad);
  }
}

}  // namespace soar
