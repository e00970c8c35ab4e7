#include "soar/geom/mesh.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

namespace soar {

namespace {

std::pair<int, int> undirected(int a, int b) { return std::minmax(a, b); }

}  // namespace

void validate_mesh(const TriMesh& mesh) {
  const int v = mesh.vertex_count();
  SOAR_REQUIRE(v >= 3, "mesh needs at least 3 vertices, got ", v);
  SOAR_REQUIRE(!mesh.faces.empty(), "mesh has no faces");

  std::set<std::pair<int, int>> seen_directed;
  std::map<std::pair<int, int>, int> edge_faces;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& face = mesh.faces[f];
    for (int k = 0; k < 3; ++k)
      SOAR_REQUIRE(face[k] >= 0 && face[k] < v, "face ", f, " references vertex ",
                   face[k], " outside [0,", v, ")");
    SOAR_REQUIRE(face[0] != face[1] && face[1] != face[2] && face[0] != face[2],
                 "face ", f, " repeats a vertex");
    for (int k = 0; k < 3; ++k) {
      const int a = face[k], b = face[(k + 1) % 3];
      SOAR_REQUIRE(seen_directed.insert({a, b}).second, "directed edge (", a, ",", b,
                   ") appears twice; inconsistent winding or non-manifold mesh");
      edge_faces[undirected(a, b)]++;
    }
  }
  for (const auto& [e, count] : edge_faces)
    SOAR_REQUIRE(count <= 2, "edge (", e.first, ",", e.second, ") shared by ", count,
                 " faces; non-manifold mesh");
}

TriMesh subdivide_midpoint(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> midpoint;
  for (const auto& face : mesh.faces)
    for (int k = 0; k < 3; ++k)
      midpoint.emplace(undirected(face[k], face[(k + 1) % 3]), -1);

  TriMesh out;
  out.vertices = mesh.vertices;
  int next = mesh.vertex_count();
  for (auto& [e, id] : midpoint) {  // map order = sorted edges
    id = next++;
    out.vertices.push_back(0.5 * (mesh.vertices[e.first] + mesh.vertices[e.second]));
  }

  out.faces.reserve(mesh.faces.size() * 4);
  for (const auto& [a, b, c] : mesh.faces) {
    const int ab = midpoint.at(undirected(a, b));
    const int bc = midpoint.at(undirected(b, c));
    const int ca = midpoint.at(undirected(c, a));
    out.faces.push_back({a, ab, ca});
    out.faces.push_back({ab, b, bc});
    out.faces.push_back({ca, bc, c});
    out.faces.push_back({ab, bc, ca});
  }
  return out;
}

std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
  std::vector<Vec3> acc(mesh.vertices.size(), Vec3::Zero());
  for (const auto& [a, b, c] : mesh.faces) {
    const Vec3 n = (mesh.vertices[b] - mesh.vertices[a])
                       .cross(mesh.vertices[c] - mesh.vertices[a]);
    acc[a] += n;  // cross product length 2*area gives the area weighting
    acc[b] += n;
    acc[c] += n;
  }
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const double len = acc[i].norm();
    SOAR_REQUIRE(len > 1e-20, "vertex ", i, " has a degenerate normal");
    acc[i] /= len;
  }
  return acc;
}

std::size_t edge_count(const TriMesh& mesh) {
  std::set<std::pair<int, int>> edges;
  for (const auto& face : mesh.faces)
    for (int k = 0; k < 3; ++k)
      edges.insert(undirected(face[k], face[(k + 1) % 3]));
  return edges.size();
}

}  // namespace soar
