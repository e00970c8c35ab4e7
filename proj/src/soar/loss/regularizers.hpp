#pragma once

#include "soar/core/image.hpp"
#include "soar/render/camera.hpp"

namespace soar {

// Mean 1 - cos between the rendered normal and the normal implied by central
// depth differences, over pixels whose 3x3 neighborhood is covered
// (alpha > 0.5). Normals and depth are camera-space render channels.
double normal_depth_consistency(const Image& depth, const Image& normal,
                                const Image& alpha, const Camera& cam,
                                Image* ddepth = nullptr, Image* dnormal = nullptr);

// Mean 1 - cos between each surfel normal and the normals of its k nearest
// canonical neighbors. `dnormals` is w.r.t. the raw normal vectors.
double curvature_penalty(const std::vector<Vec3>& positions,
                         const std::vector<Vec3>& normals,
                         std::vector<Vec3>* dnormals = nullptr, int k = 5);

// Mean squared drift from the rest positions.
double offset_penalty(const std::vector<Vec3>& positions,
                      const std::vector<Vec3>& rest,
                      std::vector<Vec3>* dpositions = nullptr);

// Mean squared deviation of field scales from their per-surfel labels.
double scale_penalty(const std::vector<double>& scales,
                     const std::vector<double>& labels,
                     std::vector<double>* dscales = nullptr);

}  // namespace soar
