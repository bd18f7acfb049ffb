#pragma once

#include "splinecggm/simulate.hpp"

// closed-form SKL between zero-mean Gaussians given precisions
inline double gaussian_skl(const scg::Matrix& prec_a, const scg::Matrix& prec_b) {
  const int n = static_cast<int>(prec_a.rows());
  Eigen::LLT<scg::Matrix> la(prec_a), lb(prec_b);
  return 0.5 * (la.solve(prec_b).trace() + lb.solve(prec_a).trace()) - n;
}
