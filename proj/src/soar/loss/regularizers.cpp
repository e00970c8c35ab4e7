#include "soar/loss/regularizers.hpp"

#include "soar/core/grid_knn.hpp"

#include <cmath>

namespace soar {

double normal_depth_consistency(const Image& depth, const Image& normal,
                                const Image& alpha, const Camera& cam, Image* ddepth,
                                Image* dnormal) {
  SOAR_REQUIRE(!depth.empty() && depth.channels() == 1 && alpha.same_shape(depth) &&
                   normal.width() == depth.width() &&
                   normal.height() == depth.height() && normal.channels() == 3,
               "consistency needs depth/alpha and a 3-channel normal map");
  SOAR_REQUIRE(depth.width() == cam.width && depth.height() == cam.height,
               "images do not match the camera size");
  const int w = depth.width(), h = depth.height();
  if (ddepth) *ddepth = Image(w, h, 1);
  if (dnormal) *dnormal = Image(w, h, 3);

  const auto covered = [&](int x, int y) { return alpha.at(x, y) > 0.5; };
  const auto point = [&](int x, int y) {
    return Vec3(depth.at(x, y) * cam.pixel_ray(x, y));
  };

  // Pass 1 fixes the pixel count so pass 2 can scale gradients in place.
  std::int64_t n = 0;
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x)
      if (covered(x, y) && covered(x - 1, y) && covered(x + 1, y) &&
          covered(x, y - 1) && covered(x, y + 1))
        ++n;
  if (n == 0) return 0.0;
  const double u = 1.0 / static_cast<double>(n);

  double total = 0.0;
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      if (!(covered(x, y) && covered(x - 1, y) && covered(x + 1, y) &&
            covered(x, y - 1) && covered(x, y + 1)))
        continue;
      const Vec3 dpx = point(x + 1, y) - point(x - 1, y);
      const Vec3 dpy = point(x, y + 1) - point(x, y - 1);
      const Vec3 c = dpy.cross(dpx);  // points towards the camera
      const double len = c.norm();
      if (len < 1e-12) {
        total += u;  // degenerate cell: flat penalty, no usable direction
        continue;
      }
      const Vec3 nd = c / len;
      const Vec3 nr = normal.pixel3(x, y);
      total += u * (1.0 - nd.dot(nr));

      if (dnormal)
        dnormal->set_pixel3(x, y, dnormal->pixel3(x, y) - u * nd);
      if (ddepth) {
        const Vec3 gc = -u * (nr - nd * nd.dot(nr)) / len;
        const Vec3 gdpx = gc.cross(dpy);
        const Vec3 gdpy = dpx.cross(gc);
        ddepth->at(x + 1, y) += cam.pixel_ray(x + 1, y).dot(gdpx);
        ddepth->at(x - 1, y) -= cam.pixel_ray(x - 1, y).dot(gdpx);
        ddepth->at(x, y + 1) += cam.pixel_ray(x, y + 1).dot(gdpy);
        ddepth->at(x, y - 1) -= cam.pixel_ray(x, y - 1).dot(gdpy);
      }
    }
  return total;
}

double curvature_penalty(const std::vector<Vec3>& positions,
                         const std::vector<Vec3>& normals,
                         std::vector<Vec3>* dnormals, int k) {
  SOAR_REQUIRE(positions.size() == normals.size(), "positions and normals disagree");
  SOAR_REQUIRE(k >= 1, "curvature needs at least one neighbor");
  const std::int64_t n = static_cast<std::int64_t>(positions.size());
  if (dnormals) dnormals->assign(n, Vec3::Zero());
  if (n < 2) return 0.0;

  const KnnGrid grid(positions);
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::vector<int> nbr = grid.nearest(positions[i], k, static_cast<int>(i));
    if (nbr.empty()) continue;
    const double scale = 1.0 / (static_cast<double>(n) * nbr.size());
    for (const int j : nbr) {
      total += scale * (1.0 - normals[i].dot(normals[j]));
      if (dnormals) {
        (*dnormals)[i] -= scale * normals[j];
        (*dnormals)[j] -= scale * normals[i];
      }
    }
  }
  return total;
}

double offset_penalty(const std::vector<Vec3>& positions,
                      const std::vector<Vec3>& rest,
                      std::vector<Vec3>* dpositions) {
  SOAR_REQUIRE(positions.size() == rest.size() && !positions.empty(),
               "offset penalty needs matching nonempty position lists");
  const double n = static_cast<double>(positions.size());
  if (dpositions) dpositions->assign(positions.size(), Vec3::Zero());
  double total = 0.0;
  for (size_t i = 0; i < positions.size(); ++i) {
    const Vec3 d = positions[i] - rest[i];
    total += d.squaredNorm() / n;
    if (dpositions) (*dpositions)[i] = 2.0 * d / n;
  }
  return total;
}

double scale_penalty(const std::vector<double>& scales,
                     const std::vector<double>& labels,
                     std::vector<double>* dscales) {
  SOAR_REQUIRE(scales.size() == labels.size() && !scales.empty(),
               "scale penalty needs matching nonempty lists");
  const double n = static_cast<double>(scales.size());
  if (dscales) dscales->assign(scales.size(), 0.0);
  double total = 0.0;
  for (size_t i = 0; i < scales.size(); ++i) {
    const double d = scales[i] - labels[i];
    total += d * d / n;
    if (dscales) (*dscales)[i] = 2.0 * d / n;
  }
  return total;
}

}  // namespace soar
