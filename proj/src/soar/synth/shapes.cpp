#include "soar/synth/shapes.hpp"

#include <cmath>

namespace soar::synth {

namespace {

constexpr double kPi = 3.14159265358979323846;

void append(TriMesh& dst, const TriMesh& src) {
  const int base = dst.vertex_count();
  dst.vertices.insert(dst.vertices.end(), src.vertices.begin(), src.vertices.end());
  for (const auto& [a, b, c] : src.faces)
    dst.faces.push_back({a + base, b + base, c + base});
}

}  // namespace

TriMesh icosahedron(double radius, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  const Vec3 raw[12] = {
      {-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  TriMesh m;
  for (const Vec3& v : raw) m.vertices.push_back(center + radius * v.normalized());
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return m;
}

TriMesh uv_sphere(int segments, int circles, double radius, const Vec3& center) {
  SOAR_REQUIRE(segments >= 3 && circles >= 1, "sphere needs segments >= 3, circles >= 1");
  TriMesh m;
  m.vertices.push_back(center + Vec3(0, radius, 0));
  for (int i = 0; i < circles; ++i) {
    const double phi = kPi * (i + 1) / (circles + 1);
    for (int k = 0; k < segments; ++k) {
      const double th = 2.0 * kPi * k / segments;
      m.vertices.push_back(center + radius * Vec3(std::sin(phi) * std::cos(th),
                                                  std::cos(phi),
                                                  std::sin(phi) * std::sin(th)));
    }
  }
  m.vertices.push_back(center + Vec3(0, -radius, 0));

  const auto ring = [&](int i, int k) { return 1 + i * segments + (k % segments); };
  const int south = 1 + circles * segments;
  for (int k = 0; k < segments; ++k)
    m.faces.push_back({0, ring(0, k + 1), ring(0, k)});
  for (int i = 0; i + 1 < circles; ++i) {
    for (int k = 0; k < segments; ++k) {
      m.faces.push_back({ring(i, k), ring(i + 1, k + 1), ring(i + 1, k)});
      m.faces.push_back({ring(i, k), ring(i, k + 1), ring(i + 1, k + 1)});
    }
  }
  for (int k = 0; k < segments; ++k)
    m.faces.push_back({south, ring(circles - 1, k), ring(circles - 1, k + 1)});
  return m;
}

TriMesh capsule(int segments, int circles, double radius, double half_length,
                const Vec3& center) {
  TriMesh m = uv_sphere(segments, circles, radius, Vec3::Zero());
  for (Vec3& v : m.vertices) {
    if (v.y() > 1e-12) v.y() += half_length;
    else if (v.y() < -1e-12) v.y() -= half_length;
    v += center;
  }
  return m;
}

TriMesh disk_patch(int segments, int rings, double radius, const Vec3& center) {
  SOAR_REQUIRE(segments >= 3 && rings >= 1, "disk needs segments >= 3, rings >= 1");
  TriMesh m;
  m.vertices.push_back(center);
  for (int j = 1; j <= rings; ++j) {
    const double rho = radius * j / rings;
    for (int k = 0; k < segments; ++k) {
      const double th = 2.0 * kPi * k / segments;
      m.vertices.push_back(center + Vec3(rho * std::cos(th), 0, rho * std::sin(th)));
    }
  }
  const auto ring = [&](int j, int k) { return 1 + (j - 1) * segments + (k % segments); };
  for (int k = 0; k < segments; ++k)
    m.faces.push_back({0, ring(1, k + 1), ring(1, k)});
  for (int j = 1; j < rings; ++j) {
    for (int k = 0; k < segments; ++k) {
      m.faces.push_back({ring(j, k), ring(j + 1, k + 1), ring(j + 1, k)});
      m.faces.push_back({ring(j, k), ring(j, k + 1), ring(j + 1, k + 1)});
    }
  }
  return m;
}

TriMesh body_resolution_mesh() {
  // 10302 + 12 + 161 vertices, 20600 + 20 + 288 faces, 30900 + 30 + 448 edges.
  TriMesh m = uv_sphere(100, 103, 0.5, Vec3(0, 0, 0));
  append(m, uv_sphere(10, 1, 0.05, Vec3(0, 0.8, 0)));
  append(m, disk_patch(32, 5, 0.1, Vec3(0, -0.8, 0)));
  return m;
}

}  // namespace soar::synth
