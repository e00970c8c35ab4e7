#include "soar/surfel/cloud.hpp"

#include <algorithm>
#include <cmath>

#include "soar/core/grid_knn.hpp"
#include "soar/geom/mesh.hpp"
#include "soar/geom/rotation.hpp"

namespace soar {

void SurfelCloud::validate() const {
  const Eigen::Index n = size();
  SOAR_REQUIRE(static_cast<Eigen::Index>(orientations.size()) == n &&
                   occlusion.size() == n,
               "surfel arrays must have identical length");
  SOAR_REQUIRE(field != nullptr, "surfel cloud has no field");
  for (Eigen::Index i = 0; i < n; ++i) {
    SOAR_REQUIRE(std::abs(orientations[i].norm() - 1.0) < 1e-6,
                 str_cat("orientation ", i, " is not a unit quaternion"));
    SOAR_REQUIRE(occlusion[i] >= 0.0 && occlusion[i] <= 1.0,
                 str_cat("occlusion ", i, " outside [0,1]"));
  }
}

namespace {

std::vector<double> knn_spacing_labels(const std::vector<Vec3>& positions, int k) {
  const KnnGrid grid(positions);
  std::vector<double> labels(positions.size());
  std::int64_t clamped = 0;
  parallel_for(static_cast<std::int64_t>(positions.size()),
               [&](std::int64_t begin, std::int64_t end) {
                 for (std::int64_t i = begin; i < end; ++i) {
                   const auto nn = grid.nearest(positions[i], k, static_cast<int>(i));
                   double sum = 0;
                   for (int j : nn) sum += (positions[i] - positions[j]).norm();
                   labels[i] = sum / k;
                 }
               });
  for (double& s : labels) {
    if (s < 1e-6) {
      s = 1e-6;
      ++clamped;
    }
  }
  if (clamped > 0)
    log_warn(str_cat(clamped, " scale labels collapsed by duplicate points; ",
                     "clamped to 1e-6 m"));
  return labels;
}

}  // namespace

std::vector<double> initial_scale_labels(const std::vector<Vec3>& positions) {
  SOAR_REQUIRE(positions.size() >= 4, "scale labels need at least 4 points");
  return knn_spacing_labels(positions, 3);
}

std::pair<Vec3, Vec3> bounding_box(const std::vector<Vec3>& points, double pad) {
  SOAR_REQUIRE(!points.empty(), "bounding box of an empty point set");
  Vec3 lo = points.front(), hi = points.front();
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = std::max((hi - lo).maxCoeff(), 1e-6);
  return {lo - Vec3::Constant(pad * extent), hi + Vec3::Constant(pad * extent)};
}

SurfelCloud init_from_template(const BodyTemplate& body, int subdivisions,
                               const FieldConfig& field_config, Rng& rng) {
  SOAR_REQUIRE(subdivisions >= 0 && subdivisions <= 3,
               str_cat("subdivisions must be in [0,3], got ", subdivisions,
                       " (memory guard)"));
  validate_mesh(body.mesh);

  TriMesh mesh = body.mesh;
  for (int i = 0; i < subdivisions; ++i) mesh = subdivide_midpoint(mesh);
  const std::vector<Vec3> normals = vertex_normals(mesh);

  SurfelCloud cloud;
  cloud.positions = mesh.vertices;
  cloud.orientations.reserve(mesh.vertices.size());
  for (const Vec3& n : normals) {
    Quat q(frame_from_normal(n));
    if (q.w() < 0) q.coeffs() = -q.coeffs();  // canonical sign for serialization
    cloud.orientations.push_back(q.normalized());
  }
  cloud.occlusion = VecX::Ones(cloud.size());
  // Tiny meshes (a bare triangle) have fewer than 3 other vertices; fall back
  // to as many neighbors as exist.
  SOAR_REQUIRE(cloud.size() >= 2, "cloud needs at least 2 surfels");
  cloud.scale_labels = knn_spacing_labels(
      cloud.positions, std::min<int>(3, static_cast<int>(cloud.size()) - 1));

  FieldConfig cfg = field_config;
  std::tie(cfg.box_lo, cfg.box_hi) = bounding_box(cloud.positions, 0.1);
  cloud.field = std::make_unique<NeuralField>(cfg, rng);
  cloud.validate();
  return cloud;
}

void query_attributes(const SurfelCloud& cloud, std::vector<double>* scales,
                      std::vector<Vec3>* colors) {
  SOAR_REQUIRE(cloud.field != nullptr, "surfel cloud has no field");
  cloud.field->query_many(cloud.positions, scales, colors);
}

}  // namespace soar
