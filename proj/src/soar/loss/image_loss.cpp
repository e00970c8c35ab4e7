#include "soar/loss/image_loss.hpp"

#include "soar/core/common.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace soar {

namespace {

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

bool in_region(const Image* region, int x, int y) {
  return region == nullptr || region->at(x, y) > 0.5;
}

void check_region(const Image& img, const Image* region) {
  if (!region) return;
  SOAR_REQUIRE(region->width() == img.width() && region->height() == img.height() &&
                   region->channels() == 1,
               "region mask must be a single-channel image of matching size");
}

Image masked(const Image& img, const Image* region) {
  if (!region) return img;
  Image out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (!in_region(region, x, y))
        for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = 0.0;
  return out;
}

}  // namespace

void LossWeights::validate() const {
  SOAR_REQUIRE(mask >= 0 && normal >= 0 && normal_depth >= 0 && curvature >= 0 &&
                   offset >= 0 && scale >= 0 && keypoint_sigma > 0 &&
                   mask_dilation >= 0,
               "loss weights must be nonnegative and sigma positive");
}

Image loss_region(const Image& target_mask, const Image& render_mask, int dilation) {
  SOAR_REQUIRE(!target_mask.empty() && target_mask.same_shape(render_mask) &&
                   target_mask.channels() == 1,
               "loss_region expects two matching single-channel masks");
  Image u(target_mask.width(), target_mask.height(), 1);
  for (size_t i = 0; i < u.size(); ++i)
    u.data()[i] = (target_mask.data()[i] > 0.5 || render_mask.data()[i] > 0.5) ? 1.0
                                                                               : 0.0;
  return dilate(u, dilation);
}

double ssim(const Image& a, const Image& b, Image* db, const Image* region) {
  SOAR_REQUIRE(!a.empty() && a.same_shape(b), "ssim needs matching images");
  check_region(a, region);
  constexpr double kC1 = 0.01 * 0.01, kC2 = 0.03 * 0.03;

  int win = std::min(11, std::min(a.width(), a.height()));
  if (win % 2 == 0) --win;
  const int r = win / 2;

  std::vector<double> w(static_cast<size_t>(win) * win);
  {
    std::vector<double> g(win);
    for (int i = 0; i < win; ++i) g[i] = std::exp(-(i - r) * (i - r) / (2.0 * 1.5 * 1.5));
    double total = 0.0;
    for (int y = 0; y < win; ++y)
      for (int x = 0; x < win; ++x) total += (w[y * win + x] = g[y] * g[x]);
    for (double& v : w) v /= total;
  }

  if (db) *db = Image(b.width(), b.height(), b.channels());

  // Count window centers first so every contribution carries its final scale.
  std::int64_t count = 0;
  for (int cy = r; cy < a.height() - r; ++cy)
    for (int cx = r; cx < a.width() - r; ++cx)
      if (in_region(region, cx, cy)) ++count;
  if (count == 0) return 1.0;
  const double denom = static_cast<double>(count) * a.channels();
  const double inv = 1.0 / denom;

  const std::int64_t rows = a.height() - 2 * r;
  const int chunk_count =
      thread_count() > 1 ? std::max(1, thread_count()) : 1;
  const std::int64_t chunk_rows = (rows + chunk_count - 1) / chunk_count;
  std::vector<double> partial(chunk_count, 0.0);
  std::vector<Image> partial_db;
  if (db)
    partial_db.assign(chunk_count, Image(b.width(), b.height(), b.channels()));

  parallel_for(rows, [&](std::int64_t begin, std::int64_t end) {
    const int id = static_cast<int>(begin / std::max<std::int64_t>(1, chunk_rows));
    double acc = 0.0;
    Image* grad = db ? &partial_db[std::min(id, chunk_count - 1)] : nullptr;
    for (std::int64_t row = begin; row < end; ++row) {
      const int cy = static_cast<int>(row) + r;
      for (int cx = r; cx < a.width() - r; ++cx) {
        if (!in_region(region, cx, cy)) continue;
        for (int c = 0; c < a.channels(); ++c) {
          double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
          for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
              const double wk = w[(dy + r) * win + (dx + r)];
              const double av = a.at(cx + dx, cy + dy, c);
              const double bv = b.at(cx + dx, cy + dy, c);
              ma += wk * av;
              mb += wk * bv;
              saa += wk * av * av;
              sbb += wk * bv * bv;
              sab += wk * av * bv;
            }
          const double va = saa - ma * ma;
          const double vb = sbb - mb * mb;
          const double cov = sab - ma * mb;
          const double A = 2 * ma * mb + kC1, B = 2 * cov + kC2;
          const double C = ma * ma + mb * mb + kC1, D = va + vb + kC2;
          const double S = (A * B) / (C * D);
          acc += S;
          if (!grad) continue;
          const double gA = inv * B / (C * D);
          const double gB = inv * A / (C * D);
          const double gC = -inv * S / C;
          const double gD = -inv * S / D;
          for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
              const double wk = w[(dy + r) * win + (dx + r)];
              const double av = a.at(cx + dx, cy + dy, c);
              const double bv = b.at(cx + dx, cy + dy, c);
              grad->at(cx + dx, cy + dy, c) +=
                  wk * (gA * 2 * ma + gB * 2 * (av - ma) + gC * 2 * mb +
                        gD * 2 * (bv - mb));
            }
        }
      }
    }
    partial[std::min(id, chunk_count - 1)] += acc;
  });

  double total = 0.0;
  for (const double p : partial) total += p;
  if (db)
    for (const Image& pg : partial_db)
      for (size_t i = 0; i < pg.size(); ++i) db->data()[i] += pg.data()[i];
  return total / denom;  // sum of exact ones divides back to exactly 1
}

double mask_loss(const Image& target, const Image& render, Image* grad,
                 const Image* region) {
  SOAR_REQUIRE(!target.empty() && target.same_shape(render),
               "mask loss needs matching images");
  check_region(target, region);
  if (grad) *grad = Image(render.width(), render.height(), render.channels());

  std::int64_t count = 0;
  for (int y = 0; y < target.height(); ++y)
    for (int x = 0; x < target.width(); ++x)
      if (in_region(region, x, y)) count += target.channels();
  if (count == 0) return 0.0;

  double acc = 0.0;
  for (int y = 0; y < target.height(); ++y)
    for (int x = 0; x < target.width(); ++x) {
      if (!in_region(region, x, y)) continue;
      for (int c = 0; c < target.channels(); ++c) {
        const double d = render.at(x, y, c) - target.at(x, y, c);
        acc += std::abs(d);
        if (grad) grad->at(x, y, c) = sign(d) / static_cast<double>(count);
      }
    }
  return acc / static_cast<double>(count);
}

double rgb_loss(const Image& target, const Image& render,
                const PerceptualDistance& pd, Image* grad, const Image* region) {
  SOAR_REQUIRE(!target.empty() && target.same_shape(render),
               "rgb loss needs matching images");
  check_region(target, region);

  Image dl1, dssim, dpd;
  const double l1 = mask_loss(target, render, grad ? &dl1 : nullptr, region);
  const double s = ssim(target, render, grad ? &dssim : nullptr, region);
  const double p =
      pd.distance(masked(target, region), masked(render, region), grad ? &dpd : nullptr);

  if (grad) {
    *grad = Image(render.width(), render.height(), render.channels());
    for (int y = 0; y < render.height(); ++y)
      for (int x = 0; x < render.width(); ++x) {
        // dl1 is region-local by construction and dssim reaches boundary
        // pixels through window support; only dpd needs the masking gate.
        const double gate = in_region(region, x, y) ? 1.0 : 0.0;
        for (int c = 0; c < render.channels(); ++c)
          grad->at(x, y, c) = 0.2 * dl1.at(x, y, c) - 0.4 * dssim.at(x, y, c) +
                              gate * dpd.at(x, y, c);
      }
  }
  return 0.2 * l1 + 0.8 * (1.0 - s) / 2.0 + p;
}

namespace {

// One directional term: 0.2 (1 - mean cos) + pd((t+1)/2, (r+1)/2), valid
// pixels only. The cosine clamp makes an exact match score exactly zero.
double normal_term(const Image& target, const Image& render, const Image& mask,
                   const PerceptualDistance& pd, Image* grad) {
  std::int64_t count = 0;
  for (size_t i = 0; i < mask.size(); ++i)
    if (mask.data()[i] > 0.5) ++count;

  if (grad) *grad = Image(render.width(), render.height(), 3);
  double cos_sum = 0.0;
  for (int y = 0; y < render.height(); ++y)
    for (int x = 0; x < render.width(); ++x) {
      if (mask.at(x, y) <= 0.5) continue;
      const double dot = target.pixel3(x, y).dot(render.pixel3(x, y));
      cos_sum += std::clamp(dot, -1.0, 1.0);
      if (grad && std::abs(dot) < 1.0)
        grad->set_pixel3(x, y, -0.2 / static_cast<double>(count) *
                                   target.pixel3(x, y));
    }
  const double cos_term =
      count == 0 ? 0.0 : 0.2 * (1.0 - cos_sum / static_cast<double>(count));

  const auto encode = [&](const Image& n) {
    Image e(n.width(), n.height(), 3);
    for (int y = 0; y < n.height(); ++y)
      for (int x = 0; x < n.width(); ++x) {
        const double m = mask.at(x, y) > 0.5 ? 1.0 : 0.0;
        e.set_pixel3(x, y, m * (n.pixel3(x, y) + Vec3::Ones()) / 2.0);
      }
    return e;
  };
  Image dpd;
  const double p = pd.distance(encode(target), encode(render), grad ? &dpd : nullptr);
  if (grad)
    for (int y = 0; y < render.height(); ++y)
      for (int x = 0; x < render.width(); ++x)
        if (mask.at(x, y) > 0.5)
          grad->set_pixel3(x, y, grad->pixel3(x, y) + dpd.pixel3(x, y) / 2.0);
  return cos_term + p;
}

}  // namespace

double normal_loss(const Image& target_front, const Image& target_back,
                   const Image& render_front, const Image& render_back,
                   const Image& valid, const PerceptualDistance& pd, Image* dfront,
                   Image* dback, const Image* region) {
  SOAR_REQUIRE(!target_front.empty() && target_front.channels() == 3 &&
                   target_front.same_shape(render_front) &&
                   target_back.same_shape(render_back) &&
                   target_back.same_shape(target_front),
               "normal loss needs four matching 3-channel maps");
  SOAR_REQUIRE(valid.width() == target_front.width() &&
                   valid.height() == target_front.height() && valid.channels() == 1,
               "validity mask must be single-channel and match the maps");
  check_region(target_front, region);

  Image mask = valid;
  if (region)
    for (int y = 0; y < mask.height(); ++y)
      for (int x = 0; x < mask.width(); ++x)
        if (!in_region(region, x, y)) mask.at(x, y) = 0.0;

  return normal_term(target_front, render_front, mask, pd, dfront) +
         normal_term(target_back, render_back, mask, pd, dback);
}

}  // namespace soar
