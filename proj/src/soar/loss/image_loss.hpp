#pragma once

#include "soar/core/image.hpp"
#include "soar/loss/perceptual.hpp"

namespace soar {

struct LossWeights {
  double mask = 1.0;
  double normal = 1.0;
  double normal_depth = 0.05;
  double curvature = 0.01;
  double offset = 0.1;
  double scale = 1.0;
  double keypoint_sigma = 50.0;  // pixels at 512x512, scales with the diagonal
  int mask_dilation = 8;

  void validate() const;
};

// Supervised pixels: the union of both masks, dilated so losses see the
// boundary band. Pixels outside carry no signal in any image loss.
Image loss_region(const Image& target_mask, const Image& render_mask,
                  int dilation = 8);

// Mean local structural similarity in [-1,1] under a Gaussian window
// (sigma 1.5, side min(11, W, H) forced odd), stabilizers for unit-range
// images. `db` receives the gradient w.r.t. b; `region` restricts to windows
// centered on region pixels. Identical images score exactly 1.
double ssim(const Image& a, const Image& b, Image* db = nullptr,
            const Image* region = nullptr);

// Mean absolute difference; the gradient is sign(render-target) / count.
double mask_loss(const Image& target, const Image& render, Image* grad = nullptr,
                 const Image* region = nullptr);

// 0.2 L1 + 0.8 (1-SSIM)/2 + perceptual distance, all region-restricted.
double rgb_loss(const Image& target, const Image& render,
                const PerceptualDistance& pd, Image* grad = nullptr,
                const Image* region = nullptr);

// Front and back normal maps: 0.2 (1 - mean cosine) over valid pixels plus
// the perceptual distance between (N+1)/2 encodings, summed over both maps.
// `valid` marks pixels whose normals are meaningful in target and render.
double normal_loss(const Image& target_front, const Image& target_back,
                   const Image& render_front, const Image& render_back,
                   const Image& valid, const PerceptualDistance& pd,
                   Image* dfront = nullptr, Image* dback = nullptr,
                   const Image* region = nullptr);

}  // namespace soar
