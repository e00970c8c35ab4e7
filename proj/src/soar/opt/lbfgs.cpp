#include "soar/opt/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace soar {

void LbfgsConfig::validate() const {
  SOAR_REQUIRE(history >= 1, "lbfgs history must be positive");
  SOAR_REQUIRE(max_iters >= 0, "lbfgs max_iters must be nonnegative");
  SOAR_REQUIRE(step_scale > 0.0, "lbfgs step_scale must be positive");
  SOAR_REQUIRE(0.0 < c1 && c1 < c2 && c2 < 1.0, "lbfgs needs 0 < c1 < c2 < 1");
  SOAR_REQUIRE(grad_tol >= 0.0, "lbfgs grad_tol must be nonnegative");
}

namespace {

struct Probe {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;  // directional derivative along the search direction
};

// phi(a) = f(x + a p). Counts objective evaluations so a pathological
// objective cannot spin forever.
class LineFunction {
 public:
  LineFunction(const LbfgsObjective& f, const VecX& x, const VecX& p)
      : f_(f), x_(x), p_(p) {}

  Probe eval(double alpha) {
    xa_ = x_ + alpha * p_;
    Probe pr;
    pr.alpha = alpha;
    pr.value = f_(xa_, grad_);
    pr.slope = grad_.dot(p_);
    ++evals_;
    if (std::isfinite(pr.value) && pr.value < best_value_) {
      best_value_ = pr.value;
      best_point_ = xa_;
    }
    return pr;
  }

  const VecX& point() const { return xa_; }
  const VecX& gradient() const { return grad_; }
  int evals() const { return evals_; }
  double best_value() const { return best_value_; }
  const VecX& best_point() const { return best_point_; }

 private:
  const LbfgsObjective& f_;
  const VecX& x_;
  const VecX& p_;
  VecX xa_, grad_, best_point_;
  double best_value_ = std::numeric_limits<double>::infinity();
  int evals_ = 0;
};

constexpr int kMaxLineEvals = 60;

// Nocedal-Wright zoom on a bracket known to contain a strong-Wolfe point.
bool zoom(LineFunction& line, const Probe& origin, Probe lo, Probe hi,
          const LbfgsConfig& cfg, Probe& out) {
  while (line.evals() < kMaxLineEvals) {
    const double span = hi.alpha - lo.alpha;
    if (std::abs(span) < 1e-16 * std::max(1.0, std::abs(lo.alpha))) return false;
    const Probe mid = line.eval(lo.alpha + 0.5 * span);
    if (mid.value > origin.value + cfg.c1 * mid.alpha * origin.slope ||
        mid.value >= lo.value) {
      hi = mid;
      continue;
    }
    if (std::abs(mid.slope) <= -cfg.c2 * origin.slope) {
      out = mid;
      return true;
    }
    if (mid.slope * span >= 0.0) hi = lo;
    lo = mid;
  }
  return false;
}

// Bracketing phase: expands until the minimizer is straddled, then zooms.
bool line_search(LineFunction& line, const Probe& origin, double alpha0,
                 const LbfgsConfig& cfg, Probe& out) {
  Probe prev = origin;
  double alpha = alpha0;
  for (int i = 0; line.evals() < kMaxLineEvals; ++i) {
    const Probe cur = line.eval(alpha);
    if (!std::isfinite(cur.value))
      return i == 0 ? false : zoom(line, origin, prev, cur, cfg, out);
    if (cur.value > origin.value + cfg.c1 * alpha * origin.slope ||
        (i > 0 && cur.value >= prev.value))
      return zoom(line, origin, prev, cur, cfg, out);
    if (std::abs(cur.slope) <= -cfg.c2 * origin.slope) {
      out = cur;
      return true;
    }
    if (cur.slope >= 0.0) return zoom(line, origin, cur, prev, cfg, out);
    prev = cur;
    alpha *= 2.0;
  }
  return false;
}

LbfgsResult minimize_impl(const LbfgsObjective& objective, const VecX& x0,
                          const LbfgsConfig& cfg) {
  LbfgsResult res;
  res.x = x0;
  VecX grad;
  res.value = objective(res.x, grad);
  SOAR_NUMERIC_CHECK(std::isfinite(res.value), "objective not finite at start");
  res.grad_norm = grad.norm();
  res.energies.push_back(res.value);
  if (res.grad_norm < cfg.grad_tol) return res;  // already at a stationary point

  std::deque<std::pair<VecX, VecX>> pairs;  // (s, y), newest last
  VecX p(x0.size()), q, alpha_buf;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // Two-loop recursion for p = -H grad.
    q = grad;
    const int m = static_cast<int>(pairs.size());
    alpha_buf.resize(m);
    for (int i = m - 1; i >= 0; --i) {
      const auto& [s, y] = pairs[i];
      alpha_buf[i] = s.dot(q) / y.dot(s);
      q -= alpha_buf[i] * y;
    }
    if (m > 0) {
      const auto& [s, y] = pairs.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (int i = 0; i < m; ++i) {
      const auto& [s, y] = pairs[i];
      q += (alpha_buf[i] - y.dot(q) / y.dot(s)) * s;
    }
    p = -q;

    double slope = grad.dot(p);
    if (!(slope < 0.0)) {  // numerically lost descent; restart from steepest
      pairs.clear();
      p = -grad;
      slope = grad.dot(p);
    }

    Probe origin{0.0, res.value, slope};
    // Unit step once curvature is learned; gradient-scaled on the first pass.
    const double alpha0 =
        cfg.step_scale * (m == 0 ? std::min(1.0, 1.0 / res.grad_norm) : 1.0);
    LineFunction line(objective, res.x, p);
    Probe accepted;
    if (!line_search(line, origin, alpha0, cfg, accepted)) {
      // Wolfe failed, but trial evaluations may still have improved on the
      // last accepted iterate; hand back the best point seen.
      if (line.best_value() < res.value) {
        res.x = line.best_point();
        res.value = objective(res.x, grad);
        res.grad_norm = grad.norm();
        res.energies.push_back(res.value);
      }
      res.status = LbfgsStatus::kLineSearchFailed;
      return res;
    }

    // The final eval inside the search is always the accepted probe, so the
    // cached point and gradient are exactly the new iterate's.
    VecX x_new = line.point();
    const VecX& g_new = line.gradient();
    VecX s = x_new - res.x;
    VecX y = g_new - grad;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      pairs.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(pairs.size()) > cfg.history) pairs.pop_front();
    }

    res.x = std::move(x_new);
    res.value = accepted.value;
    grad = g_new;
    res.grad_norm = grad.norm();
    res.energies.push_back(res.value);
    res.iterations = iter + 1;
    if (res.grad_norm < cfg.grad_tol) return res;
  }
  res.status = LbfgsStatus::kMaxIterations;
  return res;
}

}  // namespace

LbfgsResult lbfgs_minimize(const LbfgsObjective& objective, const VecX& x0,
                           const LbfgsConfig& config) {
  config.validate();
  SOAR_REQUIRE(x0.size() > 0, "lbfgs needs a nonempty start point");
  return minimize_impl(objective, x0, config);
}

}  // namespace soar
