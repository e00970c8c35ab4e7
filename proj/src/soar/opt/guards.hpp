#pragma once

#include <cmath>
#include <limits>

#include "soar/core/common.hpp"

namespace soar {

// Divergence rule shared by the training loops: abort when the loss is
// non-finite or has risen strictly for `patience` consecutive steps.
class DivergenceGuard {
 public:
  explicit DivergenceGuard(int patience = 100) : patience_(patience) {}

  void observe(double loss) {
    SOAR_NUMERIC_CHECK(std::isfinite(loss), "training loss is not finite");
    if (loss > prev_) {
      if (++rising_ >= patience_)
        throw NumericError(str_cat("training diverged: loss rose for ", rising_,
                                   " consecutive steps (latest ", loss, ")"));
    } else {
      rising_ = 0;
    }
    prev_ = loss;
  }

  int consecutive_rises() const { return rising_; }

 private:
  int patience_;
  int rising_ = 0;
  double prev_ = std::numeric_limits<double>::infinity();
};

}  // namespace soar
