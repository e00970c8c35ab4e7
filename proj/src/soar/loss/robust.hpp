#pragma once

#include "soar/core/common.hpp"

namespace soar {

// Geman-McClure: sum over components of r^2 sigma^2 / (r^2 + sigma^2).
// Near-quadratic for |r| << sigma, saturating at sigma^2 per component.
double geman_mcclure(const VecX& r, double sigma, VecX* grad = nullptr);

// Robustifier width in pixels for a given image size: `sigma_at_512` at
// 512x512, scaled with the image diagonal.
double keypoint_sigma(int width, int height, double sigma_at_512 = 50.0);

}  // namespace soar
