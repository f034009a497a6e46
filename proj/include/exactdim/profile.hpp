#pragma once

#include "exactdim/rational.hpp"

namespace exactdim::analysis {

// Piecewise-linear lower-bound profile
//   f(x) = sum_i min{r_i x, 1} + max{1 - zeta_i r_i x, 0},  x in [0,1],
// where r_i = (1+wtilde_i)/(1+wtilde_1) is the exact value of the scale
// ratio log rho_i / log rho_1 (R-independent) and
// zeta_i = (1+tau w_i)/(1+wtilde_i) > 1.
struct PiecewiseLinearProfile {
  std::size_t d = 0;
  Vec log_rho_ratios;  // r_i, ascending, r_1 = 1
  Vec zeta;
  // distinct partition boundaries, ascending, inside (0,1]:
  // I cells break at 1/r_h, J cells at 1/(zeta_k r_k)
  Vec I_breaks;
  Vec J_breaks;
};

struct ProfileMinimum {
  Rat value;
  int argmin_k = 0;  // 1-based, smallest witness
  Rat x_star;
};

PiecewiseLinearProfile make_profile(const Vec& w, const Vec& wtilde, const Rat& tau);

// exact f(x); x must lie in [0,1]
Rat f_eval(const PiecewiseLinearProfile& p, const Rat& x);

// Exact minimum of f over [0,1]: the d candidate points x_k = 1/(zeta_k r_k)
// are the only interior vertices a minimum can sit on (segment slopes fall as
// x grows, which is re-validated here), so evaluating f on them suffices.
ProfileMinimum prop_min(const PiecewiseLinearProfile& p);

}  // namespace exactdim::analysis
