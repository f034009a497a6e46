#pragma once

#include "exactdim/rational.hpp"

namespace exactdim::weights {

// Ascending positive rationals summing to 1; the last entry may equal 1
// only in dimension 1.
struct WeightVector {
  Vec w;
  std::size_t dim() const { return w.size(); }
};

WeightVector validate_weights(const Vec& raw);

struct DimensionReport {
  Rat value;
  int argmin_k = 1;  // 1-based, smallest minimizer
  Vec per_k;
};

// per_k[k-1] = (d + 1 + sum_{i<=k} (tau*w_k - tau*w_i)) / (1 + tau*w_k);
// value = min over k.
DimensionReport rynne_dimension(const WeightVector& w, const Rat& tau);

// Admissibility of delta for the auxiliary-weight construction: delta in
// (0,1), delta < (tau-1)/(tau+d), positivity and ordering of
// tau*w_i - delta*(1+tau*w_i), and in the tau*w_1 > 1/d branch the floor
// tau*w_1 - delta*(1+tau*w_1) >= 1/d.
bool delta_admissible(const WeightVector& w, const Rat& tau, const Rat& delta);

// Half the supremum of admissible deltas, located by dyadic bisection and
// replayed through delta_admissible before returning.
Rat delta0_bound(const WeightVector& w, const Rat& tau);

struct AuxiliaryWeights {
  Vec wtilde;
  int K = 0;
  Rat delta;
  Rat delta0;
};

AuxiliaryWeights auxiliary_weights(const WeightVector& w, const Rat& tau, const Rat& delta);

struct LowerBoundReport {
  Rat value;
  int argmin_h = 1;
  int argmin_k = 1;
  bool k_exceeds_K = false;
  Rat rynne;      // reference value of the closed dimension formula
  Rat slack;      // delta*(d+tau), the guaranteed proximity bound
};

// Exact minimum over h,k in 1..d of
//   sum_{i<=h} (1+wtilde_i)/(1+tau*w_k) + d - h + k
//   - sum_{i<=k} (1+tau*w_i)/(1+tau*w_k).
LowerBoundReport final_lower_bound(const WeightVector& w, const Rat& tau, const Rat& delta);

}  // namespace exactdim::weights
