#include "soar/loss/robust.hpp"

#include <cmath>

namespace soar {

double geman_mcclure(const VecX& r, double sigma, VecX* grad) {
  SOAR_REQUIRE(sigma > 0, "robustifier width must be positive");
  const double s2 = sigma * sigma;
  if (grad) grad->setZero(r.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double q = r[i] * r[i] + s2;
    total += r[i] * r[i] * s2 / q;
    if (grad) (*grad)[i] = 2.0 * r[i] * s2 * s2 / (q * q);
  }
  return total;
}

double keypoint_sigma(int width, int height, double sigma_at_512) {
  SOAR_REQUIRE(width > 0 && height > 0, "image size must be positive");
  const double diag = std::sqrt(double(width) * width + double(height) * height);
  return sigma_at_512 * diag / (512.0 * std::sqrt(2.0));
}

}  // namespace soar
