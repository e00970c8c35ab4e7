#pragma once

#include "soar/core/common.hpp"

#include <cstring>

namespace soar {

// Row-major HxWxC image of doubles in [0,1] for color/mask channels;
// unbounded for depth and signed normals.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0)
      : w_(width), h_(height), c_(channels),
        data_(static_cast<size_t>(width) * height * channels, fill) {}

  int width() const { return w_; }
  int height() const { return h_; }
  int channels() const { return c_; }
  bool empty() const { return data_.empty(); }
  size_t size() const { return data_.size(); }

  double& at(int x, int y, int ch = 0) {
    return data_[(static_cast<size_t>(y) * w_ + x) * c_ + ch];
  }
  double at(int x, int y, int ch = 0) const {
    return data_[(static_cast<size_t>(y) * w_ + x) * c_ + ch];
  }

  Vec3 pixel3(int x, int y) const {
    const double* p = &data_[(static_cast<size_t>(y) * w_ + x) * c_];
    return Vec3(p[0], p[1], p[2]);
  }
  void set_pixel3(int x, int y, const Vec3& v) {
    double* p = &data_[(static_cast<size_t>(y) * w_ + x) * c_];
    p[0] = v[0];
    p[1] = v[1];
    p[2] = v[2];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Image& o) const {
    return w_ == o.w_ && h_ == o.h_ && c_ == o.c_;
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

 private:
  int w_ = 0, h_ = 0, c_ = 0;
  std::vector<double> data_;
};

// Mean of 2x2 blocks; trailing odd row/column is dropped.
Image downsample2(const Image& img);

// Chebyshev (square) dilation of a binary mask by `radius` pixels.
Image dilate(const Image& mask, int radius);

double mean_abs_diff(const Image& a, const Image& b);

}  // namespace soar
