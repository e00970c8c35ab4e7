#pragma once

#include "soar/body/template.hpp"

namespace soar::synth {

// Capsule-shaped body with a joint chain along +y, smooth skinning ramps,
// per-joint keypoints plus the two poles, and a 2-component shape basis
// (elongation, girth). Drives unit tests and the toy capture fixtures.
BodyTemplate capsule_body(int joints = 3, int segments = 16, int circles = 15,
                          double radius = 0.25, double half_length = 0.5);

}  // namespace soar::synth
