#include "soar/synth/toy_body.hpp"

#include "soar/synth/shapes.hpp"

#include <cmath>

namespace soar::synth {

BodyTemplate capsule_body(int joints, int segments, int circles, double radius,
                          double half_length) {
  SOAR_REQUIRE(joints >= 1, "capsule body needs at least one joint");
  BodyTemplate t;
  t.mesh = capsule(segments, circles, radius, half_length);
  const int v = t.mesh.vertex_count();

  for (int j = 0; j < joints; ++j) {
    const double y = joints == 1 ? 0.0
                                 : -half_length + 2.0 * half_length * j / (joints - 1);
    t.joints.emplace_back(0.0, y, 0.0);
    t.parents.push_back(j - 1);  // chain; root at the bottom
  }

  // Gaussian falloff in height gives smooth, strictly positive weight ramps.
  const double sigma = joints > 1 ? half_length / (joints - 1) : 1.0;
  t.skin_weights = MatX::Zero(v, joints);
  for (int i = 0; i < v; ++i) {
    for (int j = 0; j < joints; ++j) {
      const double d = t.mesh.vertices[i].y() - t.joints[j].y();
      t.skin_weights(i, j) = std::exp(-0.5 * d * d / (sigma * sigma));
    }
    t.skin_weights.row(i) /= t.skin_weights.row(i).sum();
  }

  // Keypoints: both poles (one-hot) and a ring average at each joint height.
  const auto nearest_ring = [&](double y) {
    BodyTemplate::SparseRow row;
    std::vector<std::pair<double, int>> by_dist;
    for (int i = 0; i < v; ++i)
      by_dist.emplace_back(std::abs(t.mesh.vertices[i].y() - y), i);
    std::partial_sort(by_dist.begin(), by_dist.begin() + segments, by_dist.end());
    for (int k = 0; k < segments; ++k)
      row.terms.emplace_back(by_dist[k].second, 1.0 / segments);
    return row;
  };
  BodyTemplate::SparseRow north, south;
  north.terms.emplace_back(0, 1.0);                        // top pole
  south.terms.emplace_back(1 + circles * segments, 1.0);   // bottom pole
  t.keypoint_regressor.push_back(north);
  for (int j = 0; j < joints; ++j)
    t.keypoint_regressor.push_back(nearest_ring(t.joints[j].y()));
  t.keypoint_regressor.push_back(south);

  // One surface marker per joint (largest-x vertex of the nearest ring) makes
  // twist about the chain axis observable from keypoints alone.
  for (int j = 0; j < joints; ++j) {
    int best = -1;
    double best_score = -1e18;
    for (int i = 0; i < v; ++i) {
      const double score = t.mesh.vertices[i].x() -
                           10.0 * std::abs(t.mesh.vertices[i].y() - t.joints[j].y());
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    BodyTemplate::SparseRow marker;
    marker.terms.emplace_back(best, 1.0);
    t.keypoint_regressor.push_back(marker);
  }

  // Shape basis: component 0 stretches along y, component 1 inflates girth.
  MatX stretch = MatX::Zero(v, 3), girth = MatX::Zero(v, 3);
  for (int i = 0; i < v; ++i) {
    stretch(i, 1) = 0.2 * t.mesh.vertices[i].y();
    girth(i, 0) = 0.15 * t.mesh.vertices[i].x();
    girth(i, 2) = 0.15 * t.mesh.vertices[i].z();
  }
  t.vertex_shape_basis = {stretch, girth};
  MatX jstretch = MatX::Zero(joints, 3);
  for (int j = 0; j < joints; ++j) jstretch(j, 1) = 0.2 * t.joints[j].y();
  t.joint_shape_basis = {jstretch, MatX::Zero(joints, 3)};

  t.validate();
  return t;
}

}  // namespace soar::synth
