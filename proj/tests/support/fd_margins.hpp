#pragma once

// The composite is only piecewise smooth; central differences are valid when
// no perturbation can flip a hard gate. Replays every pixel against every
// surfel and demands margin from the 1/255 cutoff, the transmittance floor,
// edge-on rejection and the footprint clamp.

#include <doctest.h>

#include "soar/render/raster.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace soar::testsupport {

inline void check_fd_margins(const PosedSurfels& surfels, const Camera& cam,
                             const RenderRequest& req, double log_cut_margin,
                             double clamp_margin = 0.0) {
  const double fbar = (cam.intrinsics(0, 0) + cam.intrinsics(1, 1)) / 2.0;
  const Mat3 re = cam.extrinsics.leftCols<3>();

  struct Ent {
    Vec3 mu;
    Mat3 r;
    double seff;
  };
  std::vector<Ent> ents;
  for (Eigen::Index i = 0; i < surfels.size(); ++i) {
    Ent e;
    e.mu = cam.to_camera(surfels.positions[i]);
    e.r = re * surfels.rotations[i];
    REQUIRE(e.mu.z() > 0.5);
    const double floor_s = e.mu.z() / fbar;
    const double ratio = surfels.scales[i] / floor_s;
    REQUIRE((ratio > 1.15 || ratio < 0.85));  // footprint clamp is a gate
    e.seff = std::max(surfels.scales[i], floor_s);
    if (req.cull_backfaces)
      REQUIRE(std::abs(e.r.col(2).dot(e.mu)) > 0.2 * e.mu.norm());
    ents.push_back(e);
  }

  double min_cut_gap = 1e9, min_trans = 1.0, min_denom = 1e9, min_clamp_gap = 1e9;
  for (int py = 0; py < cam.height; ++py) {
    for (int px = 0; px < cam.width; ++px) {
      const Vec3 ray = cam.pixel_ray(px, py);
      std::vector<double> alphas;
      for (const Ent& e : ents) {
        const double denom = e.r.col(2).dot(ray);
        min_denom = std::min(min_denom, std::abs(denom));
        const double t = e.r.col(2).dot(e.mu) / denom;
        REQUIRE(t > 0.05);
        const Vec3 d = t * ray - e.mu;
        const double u = e.r.col(0).dot(d), v = e.r.col(1).dot(d);
        const double lg = -(u * u + v * v) / (2 * e.seff * e.seff);
        min_cut_gap = std::min(min_cut_gap, std::abs(lg - std::log(1.0 / 255.0)));
        min_clamp_gap = std::min(min_clamp_gap, std::abs(lg - std::log(0.999)));
        if (lg >= std::log(1.0 / 255.0))
          alphas.push_back(std::min(0.999, std::exp(lg)));
      }
      double fwd = 1.0, rev = 1.0;
      for (size_t j = 0; j < alphas.size(); ++j) {
        fwd *= 1.0 - alphas[j];
        rev *= 1.0 - alphas[alphas.size() - 1 - j];
        if (j + 1 < alphas.size())
          min_trans = std::min(min_trans, std::min(fwd, rev));
      }
    }
  }
  CAPTURE(min_cut_gap);
  CAPTURE(min_trans);
  CAPTURE(min_denom);
  // A 1e-4 step moves the exponent by at most ~2*rho/s * h ~ 1e-2 and log
  // transmittance by ~ dalpha/(1-alpha) ~ 0.2, so these margins keep every
  // perturbed evaluation on the same side of each gate.
  REQUIRE(min_cut_gap > log_cut_margin);
  REQUIRE(min_trans > 2.5e-4);  // early termination never truncates mid-stack
  REQUIRE(min_denom > 0.3);
  // The alpha clamp is a kink, not a jump; only rigs whose peaks brush 0.999
  // opt into this gap (clamped rigs sit exactly on the branch and pass 0).
  if (clamp_margin > 0.0) {
    CAPTURE(min_clamp_gap);
    REQUIRE(min_clamp_gap > clamp_margin);
  }
}

}  // namespace soar::testsupport
