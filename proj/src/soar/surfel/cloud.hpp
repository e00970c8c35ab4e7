#pragma once

#include <memory>

#include "soar/body/template.hpp"
#include "soar/surfel/field.hpp"

namespace soar {

// Canonical surfel cloud: explicit per-surfel position, orientation and
// occlusion arrays plus a neural field supplying scale and color. Opacity is
// the constant 1 and the normal is read out as the orientation's third
// column, never stored.
struct SurfelCloud {
  std::vector<Vec3> positions;       // mu_0, canonical meters
  std::vector<Quat> orientations;    // unit quaternions for R_0
  VecX occlusion;                    // tau in [0,1]
  std::unique_ptr<NeuralField> field;
  std::vector<double> scale_labels;  // 3-NN fit targets from initialization

  // Articulation binding (filled by bind_weights): LBS weights per surfel.
  MatX binding_weights;  // N x J, empty until bound

  Eigen::Index size() const { return static_cast<Eigen::Index>(positions.size()); }
  bool bound() const { return binding_weights.rows() == size(); }

  Mat3 rotation(Eigen::Index i) const { return orientations[i].toRotationMatrix(); }
  Vec3 normal(Eigen::Index i) const { return rotation(i).col(2); }

  void validate() const;
};

// Mean distance to the 3 nearest other points; duplicates clamp to 1e-6 m
// with a warning. Needs at least 4 points.
std::vector<double> initial_scale_labels(const std::vector<Vec3>& positions);

// One surfel per vertex of the subdivided template mesh: orientation frames
// from vertex normals, tau = 1 (occluded until observed), 3-NN scale labels
// stored for the subsequent pretrain_field call. The field's bounding box is
// derived from the cloud extent (10% padding); the config's box is ignored.
// subdivisions > 3 is rejected as a memory guard.
SurfelCloud init_from_template(const BodyTemplate& body, int subdivisions,
                               const FieldConfig& field_config, Rng& rng);

// Per-surfel (s, c) read through the field at the current positions.
void query_attributes(const SurfelCloud& cloud, std::vector<double>* scales,
                      std::vector<Vec3>* colors);

// Smallest axis-aligned box containing all points, symmetrically padded by
// `pad` times its largest extent on every side.
std::pair<Vec3, Vec3> bounding_box(const std::vector<Vec3>& points, double pad);

}  // namespace soar
