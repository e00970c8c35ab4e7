#pragma once

#include "soar/geom/mesh.hpp"

namespace soar::synth {

// Closed meshes are wound so that face normals point outward.

TriMesh icosahedron(double radius = 1.0, const Vec3& center = Vec3::Zero());

// Revolution sphere around +y: `circles` latitude circles of `segments`
// vertices each, plus two poles.
TriMesh uv_sphere(int segments, int circles, double radius,
                  const Vec3& center = Vec3::Zero());

// Sphere with the two halves pulled apart along +y by `half_length`; the gap
// between the equatorial circles becomes the cylindrical side wall.
TriMesh capsule(int segments, int circles, double radius, double half_length,
                const Vec3& center = Vec3::Zero());

// Open disk in the xz plane (normal +y): `rings` concentric circles around a
// center vertex. Has a boundary.
TriMesh disk_patch(int segments, int rings, double radius,
                   const Vec3& center = Vec3::Zero());

// Composite test mesh with body-scan-resolution counts: V=10475, F=20908,
// E=31378. Two midpoint subdivisions take it to exactly 167333 vertices.
TriMesh body_resolution_mesh();

}  // namespace soar::synth
