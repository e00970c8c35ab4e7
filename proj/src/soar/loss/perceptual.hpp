#pragma once

#include "soar/core/image.hpp"

#include <memory>
#include <string>
#include <vector>

namespace soar {

// Perceptual image distance: symmetric, nonnegative, zero on identical
// inputs, differentiable w.r.t. the second argument.
class PerceptualDistance {
 public:
  virtual ~PerceptualDistance() = default;
  virtual double distance(const Image& a, const Image& b, Image* db = nullptr) const = 0;
  virtual std::string describe() const = 0;
};

// Mean absolute difference over a x2 mean-pool pyramid, averaged over levels.
// Levels past the point where an image collapses to zero size are skipped.
class PyramidPerceptual final : public PerceptualDistance {
 public:
  explicit PyramidPerceptual(int levels = 4);
  double distance(const Image& a, const Image& b, Image* db = nullptr) const override;
  std::string describe() const override { return "pyramid"; }

 private:
  int levels_;
};

// Frozen feature network: stages of 3x3 same-padded convolution, ReLU and 2x2
// mean pooling, defined by convN.weight [out,in,3,3] / convN.bias [out]
// tensors in an archive. The distance is the mean over stages of the mean
// absolute difference between post-ReLU feature maps.
class FeaturePerceptual final : public PerceptualDistance {
 public:
  explicit FeaturePerceptual(const std::string& weights_path);
  double distance(const Image& a, const Image& b, Image* db = nullptr) const override;
  std::string describe() const override { return "feature"; }

  int input_channels() const;
  int stage_count() const { return static_cast<int>(stages_.size()); }

 private:
  struct Stage {
    int in = 0, out = 0;
    std::vector<double> weight;  // [out][in][3][3]
    std::vector<double> bias;    // [out]
  };
  std::vector<Image> features(const Image& x, std::vector<Image>* pre) const;
  std::vector<Stage> stages_;
};

// Feature distance when the archive exists, pyramid fallback (with a logged
// notice) when the path is empty or unreadable.
std::unique_ptr<PerceptualDistance> make_perceptual(const std::string& weights_path);

}  // namespace soar
