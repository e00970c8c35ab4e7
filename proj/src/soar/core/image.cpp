#include "soar/core/image.hpp"

#include <algorithm>
#include <cmath>

namespace soar {

Image downsample2(const Image& img) {
  const int w = img.width() / 2, h = img.height() / 2, c = img.channels();
  SOAR_REQUIRE(w >= 1 && h >= 1, "downsample2: image too small (", img.width(), "x", img.height(), ")");
  Image out(w, h, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k)
        out.at(x, y, k) = 0.25 * (img.at(2 * x, 2 * y, k) + img.at(2 * x + 1, 2 * y, k) +
                                  img.at(2 * x, 2 * y + 1, k) + img.at(2 * x + 1, 2 * y + 1, k));
  return out;
}

Image dilate(const Image& mask, int radius) {
  SOAR_REQUIRE(mask.channels() == 1, "dilate expects a single-channel mask");
  const int w = mask.width(), h = mask.height();
  // Separable: horizontal max then vertical max.
  Image tmp(w, h, 1), out(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double m = 0.0;
      for (int dx = -radius; dx <= radius; ++dx) {
        const int xx = x + dx;
        if (xx < 0 || xx >= w) continue;
        m = std::max(m, mask.at(xx, y));
      }
      tmp.at(x, y) = m;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double m = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        m = std::max(m, tmp.at(x, yy));
      }
      out.at(x, y) = m;
    }
  return out;
}

double mean_abs_diff(const Image& a, const Image& b) {
  SOAR_REQUIRE(a.same_shape(b), "mean_abs_diff: shape mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += std::abs(a.data()[i] - b.data()[i]);
  return a.size() ? s / static_cast<double>(a.size()) : 0.0;
}

}  // namespace soar
