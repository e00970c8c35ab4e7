#include "soar/opt/adam.hpp"

#include <cmath>

namespace soar {

void Adam::step(VecX& params, const VecX& grad) {
  SOAR_REQUIRE(params.size() == m_.size() && grad.size() == m_.size(),
               "adam group size mismatch: params ", params.size(), ", grad ",
               grad.size(), ", state ", m_.size());
  if (!grad.allFinite()) {
    skipped_++;
    log_warn(str_cat("adam: skipping update with non-finite gradient (", skipped_,
                     " skips so far)"));
    return;
  }
  t_++;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
  params.array() -=
      cfg_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.eps);
}

void Adam::restore(const VecX& m, const VecX& v, int t, int skipped) {
  SOAR_REQUIRE(m.size() == m_.size() && v.size() == v_.size(),
               "adam restore size mismatch");
  m_ = m;
  v_ = v;
  t_ = t;
  skipped_ = skipped;
}

}  // namespace soar
