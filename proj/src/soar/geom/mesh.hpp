#pragma once

#include "soar/core/common.hpp"

#include <array>

namespace soar {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }
};

// Rejects out-of-range indices, degenerate faces, edges shared by more than
// two faces, and inconsistent winding. Boundary edges are accepted.
void validate_mesh(const TriMesh& mesh);

// One round of 1-to-4 midpoint subdivision (no smoothing). New vertices are
// the original ones followed by edge midpoints in sorted-edge order, which
// keeps the output deterministic.
TriMesh subdivide_midpoint(const TriMesh& mesh);

// Area-weighted vertex normals, normalized to unit length.
std::vector<Vec3> vertex_normals(const TriMesh& mesh);

std::size_t edge_count(const TriMesh& mesh);

}  // namespace soar
