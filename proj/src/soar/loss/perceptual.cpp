#include "soar/loss/perceptual.hpp"

#include "soar/core/common.hpp"
#include "soar/loss/tensor_archive.hpp"

#include <cmath>
#include <filesystem>

namespace soar {

namespace {

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// Adjoint of downsample2: each kept 2x2 block receives a quarter of its
// pooled pixel's gradient; dropped trailing row/column gets nothing.
Image upsample_adjoint(const Image& g, int parent_w, int parent_h) {
  Image out(parent_w, parent_h, g.channels());
  for (int y = 0; y < 2 * g.height(); ++y)
    for (int x = 0; x < 2 * g.width(); ++x)
      for (int c = 0; c < g.channels(); ++c)
        out.at(x, y, c) = g.at(x / 2, y / 2, c) / 4.0;
  return out;
}

}  // namespace

PyramidPerceptual::PyramidPerceptual(int levels) : levels_(levels) {
  SOAR_REQUIRE(levels >= 1, "pyramid needs at least one level");
}

double PyramidPerceptual::distance(const Image& a, const Image& b, Image* db) const {
  SOAR_REQUIRE(!a.empty() && a.same_shape(b),
               "perceptual distance needs two images of identical shape");
  std::vector<Image> pa{a}, pb{b};
  while (static_cast<int>(pa.size()) < levels_) {
    Image na = downsample2(pa.back());
    if (na.empty()) break;
    pa.push_back(std::move(na));
    pb.push_back(downsample2(pb.back()));
  }
  const int used = static_cast<int>(pa.size());

  double value = 0.0;
  for (int l = 0; l < used; ++l) value += mean_abs_diff(pa[l], pb[l]) / used;
  if (!db) return value;

  Image chain;  // gradient w.r.t. pb[l], deepest level first
  for (int l = used - 1; l >= 0; --l) {
    Image g = chain.empty() ? Image(pb[l].width(), pb[l].height(), pb[l].channels())
                            : upsample_adjoint(chain, pb[l].width(), pb[l].height());
    const double scale = 1.0 / (used * static_cast<double>(pb[l].size()));
    for (size_t i = 0; i < g.size(); ++i)
      g.data()[i] += scale * sign(pb[l].data()[i] - pa[l].data()[i]);
    chain = std::move(g);
  }
  *db = std::move(chain);
  return value;
}

FeaturePerceptual::FeaturePerceptual(const std::string& weights_path) {
  const std::vector<NamedTensor> tensors = read_tensor_archive(weights_path);
  const auto find = [&](const std::string& name) -> const NamedTensor* {
    for (const NamedTensor& t : tensors)
      if (t.name == name) return &t;
    return nullptr;
  };
  for (int k = 0;; ++k) {
    const NamedTensor* w = find(str_cat("conv", k, ".weight"));
    const NamedTensor* b = find(str_cat("conv", k, ".bias"));
    if (!w) break;
    SOAR_REQUIRE(b, "conv", k, ".bias missing from ", weights_path);
    SOAR_REQUIRE(w->dims.size() == 4 && w->dims[2] == 3 && w->dims[3] == 3,
                 "conv", k, ".weight must be [out,in,3,3]");
    Stage s;
    s.out = static_cast<int>(w->dims[0]);
    s.in = static_cast<int>(w->dims[1]);
    SOAR_REQUIRE(b->dims.size() == 1 && b->dims[0] == s.out, "conv", k,
                 ".bias must be [out]");
    SOAR_REQUIRE(stages_.empty() || stages_.back().out == s.in,
                 "conv", k, " input width does not chain");
    s.weight.assign(w->data.data(), w->data.data() + w->data.size());
    s.bias.assign(b->data.data(), b->data.data() + b->data.size());
    stages_.push_back(std::move(s));
  }
  SOAR_REQUIRE(!stages_.empty(), "no conv stages in ", weights_path);
}

int FeaturePerceptual::input_channels() const { return stages_.front().in; }

namespace {

Image conv3x3_same(const Image& x, const std::vector<double>& w,
                   const std::vector<double>& bias, int in, int out) {
  Image y(x.width(), x.height(), out);
  for (int py = 0; py < x.height(); ++py)
    for (int px = 0; px < x.width(); ++px)
      for (int o = 0; o < out; ++o) {
        double acc = bias[o];
        for (int i = 0; i < in; ++i)
          for (int ky = 0; ky < 3; ++ky) {
            const int yy = py + ky - 1;
            if (yy < 0 || yy >= x.height()) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int xx = px + kx - 1;
              if (xx < 0 || xx >= x.width()) continue;
              acc += w[((o * in + i) * 3 + ky) * 3 + kx] * x.at(xx, yy, i);
            }
          }
        y.at(px, py, o) = acc;
      }
  return y;
}

Image conv3x3_adjoint(const Image& dy, const std::vector<double>& w, int in, int out) {
  Image dx(dy.width(), dy.height(), in);
  for (int py = 0; py < dy.height(); ++py)
    for (int px = 0; px < dy.width(); ++px)
      for (int i = 0; i < in; ++i) {
        double acc = 0.0;
        for (int o = 0; o < out; ++o)
          for (int ky = 0; ky < 3; ++ky) {
            const int yy = py - (ky - 1);
            if (yy < 0 || yy >= dy.height()) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int xx = px - (kx - 1);
              if (xx < 0 || xx >= dy.width()) continue;
              acc += w[((o * in + i) * 3 + ky) * 3 + kx] * dy.at(xx, yy, o);
            }
          }
        dx.at(px, py, i) = acc;
      }
  return dx;
}

}  // namespace

std::vector<Image> FeaturePerceptual::features(const Image& x,
                                               std::vector<Image>* pre) const {
  std::vector<Image> feats;
  Image cur = x;
  for (const Stage& s : stages_) {
    SOAR_REQUIRE(cur.channels() == s.in, "feature net expects ", s.in,
                 " channels, image has ", cur.channels());
    SOAR_REQUIRE(!cur.empty(), "image pooled away before the last stage");
    Image y = conv3x3_same(cur, s.weight, s.bias, s.in, s.out);
    Image f = y;
    for (size_t i = 0; i < f.size(); ++i) f.data()[i] = std::max(0.0, f.data()[i]);
    if (pre) pre->push_back(std::move(y));
    cur = downsample2(f);
    feats.push_back(std::move(f));
  }
  return feats;
}

double FeaturePerceptual::distance(const Image& a, const Image& b, Image* db) const {
  SOAR_REQUIRE(!a.empty() && a.same_shape(b),
               "perceptual distance needs two images of identical shape");
  const std::vector<Image> fa = features(a, nullptr);
  std::vector<Image> pre;
  const std::vector<Image> fb = features(b, &pre);
  const int n = static_cast<int>(fa.size());

  double value = 0.0;
  for (int s = 0; s < n; ++s) value += mean_abs_diff(fa[s], fb[s]) / n;
  if (!db) return value;

  Image chain;  // gradient w.r.t. the pooled input of the next stage
  for (int s = n - 1; s >= 0; --s) {
    Image gf(fb[s].width(), fb[s].height(), fb[s].channels());
    if (!chain.empty()) gf = upsample_adjoint(chain, fb[s].width(), fb[s].height());
    const double scale = 1.0 / (n * static_cast<double>(fb[s].size()));
    for (size_t i = 0; i < gf.size(); ++i)
      gf.data()[i] += scale * sign(fb[s].data()[i] - fa[s].data()[i]);
    for (size_t i = 0; i < gf.size(); ++i)
      if (pre[s].data()[i] <= 0.0) gf.data()[i] = 0.0;
    chain = conv3x3_adjoint(gf, stages_[s].weight, stages_[s].in, stages_[s].out);
  }
  *db = std::move(chain);
  return value;
}

std::unique_ptr<PerceptualDistance> make_perceptual(const std::string& weights_path) {
  if (weights_path.empty()) return std::make_unique<PyramidPerceptual>();
  if (!std::filesystem::exists(weights_path)) {
    log_warn(str_cat("perceptual weights not found at ", weights_path,
                     "; falling back to the pyramid distance"));
    return std::make_unique<PyramidPerceptual>();
  }
  return std::make_unique<FeaturePerceptual>(weights_path);
}

}  // namespace soar
