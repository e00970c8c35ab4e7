#include "soar/render/camera.hpp"

namespace soar {

void Camera::validate() const {
  SOAR_REQUIRE(width >= 1 && height >= 1, "camera image is ", width, "x", height);
  SOAR_REQUIRE(intrinsics(0, 0) > 0 && intrinsics(1, 1) > 0,
               "focal lengths must be positive");
  SOAR_REQUIRE(intrinsics(1, 0) == 0 && intrinsics(2, 0) == 0 && intrinsics(2, 1) == 0 &&
                   std::abs(intrinsics(2, 2) - 1.0) < 1e-12,
               "intrinsics must be upper-triangular with unit last diagonal");
  const Mat3 r = extrinsics.leftCols<3>();
  SOAR_REQUIRE((r.transpose() * r - Mat3::Identity()).norm() < 1e-6,
               "extrinsic rotation is not orthonormal");
}

Vec3 Camera::pixel_ray(int px, int py) const {
  const double fx = intrinsics(0, 0), fy = intrinsics(1, 1);
  const double cx = intrinsics(0, 2), cy = intrinsics(1, 2);
  const double s = intrinsics(0, 1);
  const double y = (py + 0.5 - cy) / fy;
  return Vec3((px + 0.5 - cx - s * y) / fx, y, 1.0);
}

Mat3 make_intrinsics(double fx, double fy, double cx, double cy) {
  Mat3 k = Mat3::Identity();
  k(0, 0) = fx;
  k(1, 1) = fy;
  k(0, 2) = cx;
  k(1, 2) = cy;
  return k;
}

Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up,
               const Mat3& intrinsics, int width, int height) {
  const Vec3 z = (target - eye).normalized();
  Vec3 x = up.cross(z);
  SOAR_REQUIRE(x.norm() > 1e-9, "look_at direction is parallel to up");
  x.normalize();
  const Vec3 y = z.cross(x);
  Camera cam;
  cam.intrinsics = intrinsics;
  Mat3 r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  cam.extrinsics.leftCols<3>() = r;
  cam.extrinsics.col(3) = -(r * eye);
  cam.width = width;
  cam.height = height;
  return cam;
}

}  // namespace soar
