#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace soar::testing {

// Central-difference gradient of a scalar function, one coordinate at a time.
template <typename F>
Eigen::VectorXd fd_gradient(F&& f, Eigen::VectorXd x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double hi = f(x);
    x[i] = orig - h;
    const double lo = f(x);
    x[i] = orig;
    g[i] = (hi - lo) / (2.0 * h);
  }
  return g;
}

inline double grad_rel_err(const Eigen::VectorXd& analytic, const Eigen::VectorXd& fd) {
  return (analytic - fd).norm() / std::max(1.0, fd.norm());
}

}  // namespace soar::testing
