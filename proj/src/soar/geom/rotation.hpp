#pragma once

#include "soar/core/common.hpp"

namespace soar {

// Axis-angle to rotation matrix. Analytic at the zero vector.
Mat3 rodrigues(const Vec3& axis_angle);

// VJP of rodrigues: given dL/dR, returns dL/d(axis_angle).
Vec3 rodrigues_backward(const Vec3& axis_angle, const Mat3& grad_rotation);

// Inverse map (matrix log), for diagnostics and geodesic distances.
Vec3 rotation_log(const Mat3& rotation);

double geodesic_distance(const Mat3& a, const Mat3& b);

// Rotation from a possibly non-unit quaternion; the input is normalized first.
Mat3 quat_to_matrix(const Quat& q);

// VJP through quat_to_matrix including the normalization.
Vec4 quat_to_matrix_backward(const Quat& q, const Mat3& grad_rotation);

// Left-multiplicative update R <- exp([delta]x) R expressed on quaternions.
Quat quat_apply_tangent(const Quat& q, const Vec3& delta);

// Gradient w.r.t. the tangent delta at delta = 0 for R(delta) = exp([delta]x) R0.
Vec3 tangent_gradient(const Mat3& rotation, const Mat3& grad_rotation);

// Nearest-rotation projection of a 3x3 by Gram-Schmidt on the first two
// columns; the third output column is r1 x r2 (det +1 always).
Mat3 orthonormalize(const Mat3& m);

// VJP of orthonormalize. The third input column never contributes.
Mat3 orthonormalize_backward(const Mat3& m, const Mat3& grad_rotation);

// Deterministic tangent frame: third column equals `normal`, first two span
// the tangent plane, built from the global axis least aligned with the normal.
Mat3 frame_from_normal(const Vec3& normal);

}  // namespace soar
