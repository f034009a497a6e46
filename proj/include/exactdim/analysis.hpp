#pragma once

#include <string>
#include <vector>

#include "exactdim/cantor.hpp"
#include "exactdim/geometry.hpp"
#include "exactdim/profile.hpp"
#include "exactdim/rational.hpp"
#include "exactdim/schedule.hpp"

namespace exactdim::analysis {

// Profile of a resolved schedule. Only (w, wtilde, tau) enter: the scale
// ratios log rho_i / log rho_1 reduce to (1+wtilde_i)/(1+wtilde_1) exactly.
PiecewiseLinearProfile make_profile(const schedule::ParameterSchedule& s);

// One trial box pushed through the mass bound at its resolved scale.
struct LocalDimRecord {
  std::size_t box_id = 0;
  Rat side;  // largest axis side of the trial box
  Int n;     // scale index, rho_1^{-(n+1)} <= side < rho_1^{-n}
  Int n_B;  // counting level max{n, n_k^{(d)}+1} for the stage k owning n
  Rat mu_bound;             // #{boxes at level n_B meeting B} / #E_{n_B}
  double log_ell_mu = 0.0;  // log(#E_{n_B})/((n+1) log rho_1)
                            //   - log(meet count)/(n log rho_1)
  double f_main_term = 0.0;  // profile value at x = n_k/n
  double residual = 0.0;     // log_ell_mu - f_main_term, reported only
};

struct LocalDimReport {
  std::vector<LocalDimRecord> records;
  double aggregate_min = 0.0;  // min of log_ell_mu over the records
};

// Per-box lower bounds on log_side mu(B) from actual tree counts. A box
// is measured by its largest side, which must resolve to a steered stage
// (the scale index has to exceed the first stage start) at a counting
// level the tree actually holds; anything else is out of range. A box
// missing the tree entirely carries mass zero and an infinite exponent.
LocalDimReport local_dimension(const cantor::CantorTree& t,
                               const std::vector<Box>& trial_boxes);

std::string local_dimension_csv(const LocalDimReport& r);

// Least-squares slope of log N(l) against -log l, where N(l) counts the
// occupied cells of the axis-aligned l-grid. Needs two distinct scales.
double box_counting(const std::vector<Vec>& points, const Vec& scales);

}  // namespace exactdim::analysis
