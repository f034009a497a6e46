#pragma once

#include "exactdim/geometry.hpp"
#include "exactdim/power_product.hpp"
#include "exactdim/rational.hpp"

namespace exactdim {

// Exact ordering of max_i |x_i|^{1/u_i} against c > 0. Each axis is decided
// by clearing the fractional exponent: |x_i|^{1/u_i} <=> c reduces to
// |x_i|^{b_i} <=> c^{a_i} for u_i = a_i/b_i.
int weighted_norm_cmp(const Vec& x, const Vec& u, const Rat& c);

// Value of the norm within 10^{-precision}, consistent with the exact
// comparison (the returned midpoint is certified by power-cleared cmps).
Rat weighted_norm_approx(const Vec& x, const Vec& u, unsigned precision);

void validate_norm_weights(const Vec& u);

// All r/s with s_lo <= s < s_hi admitting some x in (closed) E with
// |s x_i - r_i| <= (eps/s)^{u_i} on every axis, sorted by (s, r).
std::vector<RationalVector> dangerous_rationals(const Box& E, const Int& s_lo, const Int& s_hi,
                                                const Vec& u, const Rat& eps, Budget& budget);

}  // namespace exactdim
