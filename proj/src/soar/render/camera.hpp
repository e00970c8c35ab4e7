#pragma once

#include "soar/core/common.hpp"

namespace soar {

// Pinhole camera, computer-vision convention: camera z forward, image x
// right, y down. Points with positive camera-space z are in front.
struct Camera {
  Mat3 intrinsics = Mat3::Identity();  // pixels, upper-triangular
  Mat34 extrinsics;                    // world -> camera rigid map
  int width = 0, height = 0;

  Camera() {
    extrinsics.setZero();
    extrinsics.leftCols<3>().setIdentity();
  }

  void validate() const;

  Vec3 to_camera(const Vec3& world) const {
    return extrinsics.leftCols<3>() * world + extrinsics.col(3);
  }
  Vec3 rotate_to_camera(const Vec3& dir) const {
    return extrinsics.leftCols<3>() * dir;
  }

  // Projection of a camera-space point; requires z > 0.
  Vec2 project_camera(const Vec3& cam) const {
    const Vec3 q = intrinsics * cam;
    return Vec2(q.x() / q.z(), q.y() / q.z());
  }

  // Unnormalized ray direction through the center of pixel (px, py), in
  // camera space; its z component is 1, so the ray parameter equals depth.
  Vec3 pixel_ray(int px, int py) const;

  Vec3 position() const {  // camera center in world space
    return -extrinsics.leftCols<3>().transpose() * extrinsics.col(3);
  }
};

Mat3 make_intrinsics(double fx, double fy, double cx, double cy);

Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up,
               const Mat3& intrinsics, int width, int height);

}  // namespace soar
