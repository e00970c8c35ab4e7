#include "soar/geom/rotation.hpp"

#include <cmath>

namespace soar {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

}  // namespace

Mat3 rodrigues(const Vec3& v) {
  const double theta2 = v.squaredNorm();
  double a, b;  // sin(t)/t and (1-cos(t))/t^2
  if (theta2 < 1e-16) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Mat3 k = skew(v);
  return Mat3::Identity() + a * k + b * (k * k);
}

Vec3 rodrigues_backward(const Vec3& v, const Mat3& grad) {
  const double theta2 = v.squaredNorm();
  Vec3 out = Vec3::Zero();
  if (theta2 < 1e-14) {
    // d R / d v_i at zero is [e_i]x.
    for (int i = 0; i < 3; ++i) {
      const Mat3 d = skew(Vec3::Unit(i));
      out[i] = (grad.array() * d.array()).sum();
    }
    return out;
  }
  // Gallego & Yezzi form: dR/dv_i = (v_i [v]x + [v x (I - R) e_i]x) / |v|^2 * R.
  const Mat3 r = rodrigues(v);
  const Mat3 kv = skew(v);
  const Mat3 ImR = Mat3::Identity() - r;
  for (int i = 0; i < 3; ++i) {
    const Vec3 w = v.cross(ImR.col(i));
    const Mat3 d = ((v[i] * kv + skew(w)) / theta2) * r;
    out[i] = (grad.array() * d.array()).sum();
  }
  return out;
}

Vec3 rotation_log(const Mat3& r) {
  Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

double geodesic_distance(const Mat3& a, const Mat3& b) {
  const Mat3 rel = a.transpose() * b;
  double c = (rel.trace() - 1.0) * 0.5;
  c = std::min(1.0, std::max(-1.0, c));
  return std::acos(c);
}

Mat3 quat_to_matrix(const Quat& q) {
  Quat u = q;
  u.normalize();
  return u.toRotationMatrix();
}

Vec4 quat_to_matrix_backward(const Quat& q, const Mat3& grad) {
  const double n = q.norm();
  const Quat u(q.w() / n, q.x() / n, q.y() / n, q.z() / n);
  const double w = u.w(), x = u.x(), y = u.y(), z = u.z();

  // dR/d(unit quaternion components), from the standard matrix form.
  Mat3 dw, dx, dy, dz;
  dw << 0, -2 * z, 2 * y, 2 * z, 0, -2 * x, -2 * y, 2 * x, 0;
  dx << 0, 2 * y, 2 * z, 2 * y, -4 * x, -2 * w, 2 * z, 2 * w, -4 * x;
  dy << -4 * y, 2 * x, 2 * w, 2 * x, 0, 2 * z, -2 * w, 2 * z, -4 * y;
  dz << -4 * z, -2 * w, 2 * x, 2 * w, -4 * z, 2 * y, 2 * x, 2 * y, 0;

  Vec4 g_unit;
  g_unit[0] = (grad.array() * dw.array()).sum();
  g_unit[1] = (grad.array() * dx.array()).sum();
  g_unit[2] = (grad.array() * dy.array()).sum();
  g_unit[3] = (grad.array() * dz.array()).sum();

  // Through normalization: dq = (I - u u^T) / |q| * g_unit.
  const Vec4 uv(w, x, y, z);
  return (g_unit - uv * uv.dot(g_unit)) / n;
}

Quat quat_apply_tangent(const Quat& q, const Vec3& delta) {
  const double angle = delta.norm();
  Quat dq;
  if (angle < 1e-14) {
    dq = Quat(1.0, 0.5 * delta.x(), 0.5 * delta.y(), 0.5 * delta.z());
  } else {
    const double half = 0.5 * angle;
    const double s = std::sin(half) / angle;
    dq = Quat(std::cos(half), s * delta.x(), s * delta.y(), s * delta.z());
  }
  Quat out = dq * q;
  out.normalize();
  return out;
}

Vec3 tangent_gradient(const Mat3& rotation, const Mat3& grad) {
  // dR/d(delta_k) at 0 is [e_k]x R; contract against the incoming gradient.
  Vec3 out;
  for (int k = 0; k < 3; ++k) {
    const Vec3 e = Vec3::Unit(k);
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += grad.col(j).dot(e.cross(rotation.col(j)));
    out[k] = s;
  }
  return out;
}

Mat3 orthonormalize(const Mat3& m) {
  const Vec3 r1 = m.col(0).normalized();
  const Vec3 u2 = m.col(1) - r1.dot(m.col(1)) * r1;
  const Vec3 r2 = u2.normalized();
  Mat3 r;
  r.col(0) = r1;
  r.col(1) = r2;
  r.col(2) = r1.cross(r2);
  return r;
}

Mat3 orthonormalize_backward(const Mat3& m, const Mat3& grad) {
  const Vec3 m1 = m.col(0), m2 = m.col(1);
  const double n1 = m1.norm();
  const Vec3 r1 = m1 / n1;
  const double p = r1.dot(m2);
  const Vec3 u2 = m2 - p * r1;
  const double n2 = u2.norm();
  const Vec3 r2 = u2 / n2;

  Vec3 dr1 = grad.col(0);
  Vec3 dr2 = grad.col(1);
  const Vec3 dr3 = grad.col(2);
  // r3 = r1 x r2.
  dr1 += r2.cross(dr3);
  dr2 += dr3.cross(r1);
  // r2 = u2 / |u2|.
  const Vec3 du2 = (dr2 - r2 * r2.dot(dr2)) / n2;
  // u2 = m2 - (r1. m2) r1.
  Vec3 dm2 = du2 - du2.dot(r1) * r1;
  dr1 += -du2.dot(r1) * m2 - p * du2;
  // r1 = m1 / |m1|.
  const Vec3 dm1 = (dr1 - r1 * r1.dot(dr1)) / n1;

  Mat3 out = Mat3::Zero();
  out.col(0) = dm1;
  out.col(1) = dm2;
  return out;
}

Mat3 frame_from_normal(const Vec3& normal) {
  const Vec3 n = normal.normalized();
  int axis = 0;
  double best = std::abs(n[0]);
  for (int i = 1; i < 3; ++i) {
    if (std::abs(n[i]) < best) {
      best = std::abs(n[i]);
      axis = i;
    }
  }
  const Vec3 e = Vec3::Unit(axis);
  const Vec3 t1 = (e - n.dot(e) * n).normalized();
  const Vec3 t2 = n.cross(t1);
  Mat3 r;
  r.col(0) = t1;
  r.col(1) = t2;
  r.col(2) = n;
  return r;
}

}  // namespace soar
