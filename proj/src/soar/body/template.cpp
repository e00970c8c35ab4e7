#include "soar/body/template.hpp"

#include <cmath>

namespace soar {

void BodyTemplate::validate() const {
  validate_mesh(mesh);
  const int v = vertex_count(), j = joint_count();
  SOAR_REQUIRE(j >= 1, "template needs at least one joint");
  SOAR_REQUIRE(static_cast<int>(parents.size()) == j, "parents array length ",
               parents.size(), " != joint count ", j);

  int roots = 0;
  for (int i = 0; i < j; ++i) {
    if (parents[i] == -1) {
      roots++;
      continue;
    }
    SOAR_REQUIRE(parents[i] >= 0 && parents[i] < j && parents[i] != i, "joint ", i,
                 " has invalid parent ", parents[i]);
  }
  SOAR_REQUIRE(roots == 1, "kinematic tree needs exactly one root, found ", roots);
  for (int i = 0; i < j; ++i) {
    int cur = i, steps = 0;
    while (parents[cur] != -1) {
      cur = parents[cur];
      SOAR_REQUIRE(++steps <= j, "kinematic tree has a cycle through joint ", i);
    }
  }

  SOAR_REQUIRE(skin_weights.rows() == v && skin_weights.cols() == j,
               "skin weights are ", skin_weights.rows(), "x", skin_weights.cols(),
               ", expected ", v, "x", j);
  for (int r = 0; r < v; ++r) {
    SOAR_REQUIRE((skin_weights.row(r).array() >= 0).all(), "skin weights of vertex ",
                 r, " have negative entries");
    SOAR_REQUIRE(std::abs(skin_weights.row(r).sum() - 1.0) < 1e-6,
                 "skin weights of vertex ", r, " sum to ", skin_weights.row(r).sum());
  }

  for (std::size_t r = 0; r < keypoint_regressor.size(); ++r) {
    double sum = 0;
    for (const auto& [idx, w] : keypoint_regressor[r].terms) {
      SOAR_REQUIRE(idx >= 0 && idx < v, "keypoint ", r, " references vertex ", idx);
      sum += w;
    }
    SOAR_REQUIRE(std::abs(sum - 1.0) < 1e-6, "keypoint ", r, " weights sum to ", sum);
  }

  SOAR_REQUIRE(joint_shape_basis.empty() ||
                   joint_shape_basis.size() == vertex_shape_basis.size(),
               "joint shape basis count ", joint_shape_basis.size(),
               " != vertex shape basis count ", vertex_shape_basis.size());
  for (const MatX& b : vertex_shape_basis)
    SOAR_REQUIRE(b.rows() == v && b.cols() == 3, "vertex shape basis must be V x 3");
  for (const MatX& b : joint_shape_basis)
    SOAR_REQUIRE(b.rows() == j && b.cols() == 3, "joint shape basis must be J x 3");
}

std::vector<int> BodyTemplate::topo_order() const {
  const int j = joint_count();
  std::vector<int> order;
  order.reserve(j);
  std::vector<char> placed(j, 0);
  while (static_cast<int>(order.size()) < j) {
    const std::size_t before = order.size();
    for (int i = 0; i < j; ++i) {
      if (placed[i]) continue;
      if (parents[i] == -1 || placed[parents[i]]) {
        order.push_back(i);
        placed[i] = 1;
      }
    }
    SOAR_REQUIRE(order.size() > before, "kinematic tree is not a rooted tree");
  }
  return order;
}

std::vector<Vec3> BodyTemplate::shaped_vertices(const VecX& beta) const {
  SOAR_REQUIRE(beta.size() == shape_dim(), "beta has ", beta.size(),
               " components, template carries ", shape_dim());
  std::vector<Vec3> out = mesh.vertices;
  for (int b = 0; b < shape_dim(); ++b) {
    const MatX& basis = vertex_shape_basis[b];
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += beta[b] * basis.row(i).transpose();
  }
  return out;
}

std::vector<Vec3> BodyTemplate::shaped_joints(const VecX& beta) const {
  SOAR_REQUIRE(beta.size() == shape_dim(), "beta has ", beta.size(),
               " components, template carries ", shape_dim());
  std::vector<Vec3> out = joints;
  for (std::size_t b = 0; b < joint_shape_basis.size(); ++b) {
    const MatX& basis = joint_shape_basis[b];
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += beta[b] * basis.row(i).transpose();
  }
  return out;
}

}  // namespace soar
