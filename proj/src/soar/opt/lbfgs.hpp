#pragma once

#include "soar/core/common.hpp"

#include <functional>
#include <vector>

namespace soar {

struct LbfgsConfig {
  int history = 10;
  int max_iters = 100;
  double step_scale = 1.0;  // scales the unit trial step of each line search
  double c1 = 1e-4;
  double c2 = 0.9;
  double grad_tol = 1e-6;

  void validate() const;
};

enum class LbfgsStatus { kConverged, kMaxIterations, kLineSearchFailed };

struct LbfgsResult {
  VecX x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  LbfgsStatus status = LbfgsStatus::kConverged;
  std::vector<double> energies;  // accepted iterates, nonincreasing
};

// Evaluates the objective and writes its gradient (resized to x).
using LbfgsObjective = std::function<double(const VecX& x, VecX& grad)>;

// Two-loop recursion with a strong-Wolfe line search. Terminates on gradient
// norm below grad_tol, max_iters, or an exhausted line search; the latter
// returns the best iterate seen with kLineSearchFailed.
LbfgsResult lbfgs_minimize(const LbfgsObjective& objective, const VecX& x0,
                           const LbfgsConfig& config = {});

}  // namespace soar
