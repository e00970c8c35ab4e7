#pragma once

// Randomized surfel scenes for rasterizer stress tests. Cameras orbit the
// origin; surfels scatter through the view frustum, some behind the camera
// or edge-on so culling and clipping paths get exercised.

#include "soar/core/rng.hpp"
#include "soar/geom/rotation.hpp"
#include "soar/render/raster.hpp"

namespace soar::testsupport {

struct Scene {
  PosedSurfels surfels;
  Camera camera;
  RenderRequest request;
};

inline Scene random_scene(Rng& rng, int max_dim = 64, int max_surfels = 50) {
  Scene sc;
  const int w = 4 + static_cast<int>(rng.uniform_index(max_dim - 3));
  const int h = 4 + static_cast<int>(rng.uniform_index(max_dim - 3));
  const double f = 0.8 * std::min(w, h) * rng.uniform(0.5, 2.0);
  Mat3 k = make_intrinsics(f, f * rng.uniform(0.9, 1.1), w / 2.0 + rng.uniform(-1, 1),
                           h / 2.0 + rng.uniform(-1, 1));
  if (rng.uniform() < 0.25) k(0, 1) = rng.uniform(-0.05, 0.05) * f;
  const double az = rng.uniform(0, 6.28318530717958648);
  const double el = rng.uniform(-0.9, 0.9);
  const Vec3 eye(3.0 * std::cos(el) * std::cos(az), 3.0 * std::sin(el),
                 3.0 * std::cos(el) * std::sin(az));
  sc.camera = look_at(eye, Vec3::Zero(), Vec3::UnitY(), k, w, h);

  const int n = 1 + static_cast<int>(rng.uniform_index(max_surfels));
  sc.surfels.occlusion = VecX::Zero(n);
  for (int i = 0; i < n; ++i) {
    Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (rng.uniform() < 0.08) p = eye + 4.0 * (eye - p);  // behind the camera
    sc.surfels.positions.push_back(p);
    const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    sc.surfels.rotations.push_back(rodrigues(axis * rng.uniform(0, 3.1)));
    sc.surfels.scales.push_back(std::exp(rng.uniform(std::log(0.02), std::log(0.6))));
    sc.surfels.colors.push_back(
        Vec3(rng.uniform(), rng.uniform(), rng.uniform()));
    sc.surfels.occlusion[i] = rng.uniform();
  }

  RenderRequest& rq = sc.request;
  rq.rgb = rng.uniform() < 0.9;
  rq.mask = rng.uniform() < 0.5;
  rq.depth = rng.uniform() < 0.5;
  rq.normal = rng.uniform() < 0.5;
  rq.order = rng.uniform() < 0.5 ? DepthOrder::ascending : DepthOrder::descending;
  rq.cull_backfaces = rng.uniform() < 0.5;
  if (rq.order == DepthOrder::descending && rng.uniform() < 0.5) rq.back_normal = true;
  if (rq.cull_backfaces && rng.uniform() < 0.5) rq.occlusion = true;
  if (rng.uniform() < 0.3) {
    rq.rgb_background = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
    rq.depth_background = rng.uniform(0, 5);
  }
  if (!rq.rgb && !rq.mask && !rq.depth && !rq.normal && !rq.back_normal &&
      !rq.occlusion)
    rq.rgb = true;
  return sc;
}

}  // namespace soar::testsupport
