#pragma once

#include <vector>

#include "soar/core/image.hpp"
#include "soar/render/camera.hpp"

namespace soar {

// World-space surfels after articulation: positions/rotations are mu_t, R_t;
// scale and color come from the field at the canonical positions.
struct PosedSurfels {
  std::vector<Vec3> positions;
  std::vector<Mat3> rotations;
  std::vector<double> scales;  // > 0
  std::vector<Vec3> colors;    // componentwise [0,1]
  VecX occlusion;              // tau

  Eigen::Index size() const { return static_cast<Eigen::Index>(positions.size()); }
  void validate() const;
};

enum class DepthOrder { ascending, descending };

struct RenderRequest {
  bool rgb = true;
  bool mask = false;
  bool depth = false;
  bool normal = false;
  bool back_normal = false;  // requires descending order
  bool occlusion = false;    // requires back-face culling
  DepthOrder order = DepthOrder::ascending;
  bool cull_backfaces = false;
  Vec3 rgb_background = Vec3::Zero();
  double depth_background = 0.0;
  // Fixed compositing order for gradient tests (surfel indices; surfels
  // failing the per-surfel visibility rules are still skipped). Empty means
  // sort by view-space depth of mu_t, ties broken by index.
  std::vector<int> order_override;

  void validate() const;
};

struct RenderOutput {
  Image rgb;          // H x W x 3
  Image mask;         // H x W x 1, equals accumulated opacity
  Image depth;        // H x W x 1
  Image normal;       // H x W x 3, unit length where mask > 0.5
  Image back_normal;  // H x W x 3
  Image occlusion;    // H x W x 1
  Image alpha;        // H x W x 1, always produced
};

// Gradients w.r.t. the posed surfel inputs.
struct RenderGradients {
  std::vector<Vec3> dpositions;
  std::vector<Mat3> drotations;  // raw matrix gradient w.r.t. R_t
  VecX dscales;
  std::vector<Vec3> dcolors;
  VecX docclusion;
};

// Tile-binned alpha-compositing splatter. forward() retains the state needed
// by backward(); a Rasterizer instance serves one scene at a time.
class Rasterizer {
 public:
  explicit Rasterizer(int tile_size = 16) : tile_(tile_size) {}

  RenderOutput forward(const PosedSurfels& surfels, const Camera& camera,
                       const RenderRequest& request);

  // output_grads carries one image per channel being differentiated; images
  // for channels that were not rendered must be empty. Channel image shapes
  // must match the forward output.
  RenderGradients backward(const RenderOutput& output_grads) const;

 private:
  struct SurfelPre {
    Vec3 mu_cam;
    Mat3 r_cam;
    double s_eff;
    bool s_clamped;  // footprint floor active: s_eff = z / f_mean
  };

  struct Hit {
    double alpha, g, u, v, tstar, denom;
    bool alpha_clamped;
  };

  bool intersect(const SurfelPre& pre, const Vec3& ray, Hit* hit) const;

  int tile_;
  // Forward cache.
  PosedSurfels surfels_;
  Camera cam_;
  RenderRequest req_;
  std::vector<SurfelPre> pre_;
  std::vector<int> order_;              // active surfel indices, composite order
  std::vector<std::vector<int>> bins_;  // per tile: positions into order_
  int tiles_x_ = 0, tiles_y_ = 0;
  double f_mean_ = 0;
  bool have_forward_ = false;
};

// Convenience single-shot render.
RenderOutput render_posed(const PosedSurfels& surfels, const Camera& camera,
                          const RenderRequest& request);

constexpr double kAlphaMax = 0.999;
constexpr double kGaussianCutoff = 1.0 / 255.0;
constexpr double kTransmittanceFloor = 1e-4;
constexpr double kNearClip = 1e-4;

}  // namespace soar
