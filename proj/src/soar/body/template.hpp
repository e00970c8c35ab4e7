#pragma once

#include "soar/geom/mesh.hpp"

namespace soar {

// Rest-pose body model: mesh, kinematic tree, skinning weights, optional
// linear shape basis, and a sparse keypoint regressor. Joint and keypoint
// counts are data, so toy skeletons exercise the same paths as full bodies.
struct BodyTemplate {
  TriMesh mesh;              // canonical pose
  std::vector<Vec3> joints;  // rest joint locations
  std::vector<int> parents;  // root has parent -1
  MatX skin_weights;         // V x J, rows nonnegative, each summing to 1

  // Linear shape offsets: shaped = rest + sum_b beta[b] * basis[b].
  std::vector<MatX> vertex_shape_basis;  // each V x 3
  std::vector<MatX> joint_shape_basis;   // each J x 3 (empty or same count)

  struct SparseRow {
    std::vector<std::pair<int, double>> terms;  // (vertex index, weight)
  };
  std::vector<SparseRow> keypoint_regressor;

  int vertex_count() const { return mesh.vertex_count(); }
  int joint_count() const { return static_cast<int>(joints.size()); }
  int keypoint_count() const { return static_cast<int>(keypoint_regressor.size()); }
  int shape_dim() const { return static_cast<int>(vertex_shape_basis.size()); }

  void validate() const;

  // Evaluation order with parents before children; root first.
  std::vector<int> topo_order() const;

  std::vector<Vec3> shaped_vertices(const VecX& beta) const;
  std::vector<Vec3> shaped_joints(const VecX& beta) const;
};

}  // namespace soar
