#pragma once

#include <optional>
#include <vector>

#include "exactdim/geometry.hpp"
#include "exactdim/rational.hpp"
#include "exactdim/weighted_norm.hpp"

namespace exactdim {

// Full-rank lattice given by generators; basis[j] is the j-th generator
// (a column of the basis matrix).
struct LatticeBasis {
  std::vector<Vec> basis;
  std::size_t dim() const { return basis.size(); }
};

// The body prod_i [-radii_i, radii_i].
struct SymmetricBox {
  Vec radii;
  std::size_t dim() const { return radii.size(); }
  Rat volume() const;
  // gauge(v) = max_i |v_i| / radii_i; v lies in t*K iff gauge(v) <= t
  Rat gauge(const Vec& v) const;
};

struct MinimaReport {
  Vec lambda;                   // ascending
  std::vector<Vec> witnesses;   // witness i has gauge lambda[i]; every prefix independent
};

Rat basis_determinant(const LatticeBasis& L);

// Basis [[I, x], [0, 1]]. With lemma_convention the identity block is negated;
// both generate {(q x - p, q) : p integer vector, q integer} and have det +-1.
LatticeBasis shear_lattice(const Vec& x, bool lemma_convention = false);

// Exact successive minima by direct lattice-point enumeration (dim <= 4).
// Each lambda_i is a gauge value, hence rational; witnesses are chosen
// smallest in (gauge, sign-canonical lexicographic) order.
MinimaReport successive_minima(const SymmetricBox& K, const LatticeBasis& L, Budget& budget);

struct MinkowskiReport {
  Rat product;  // vol(K) * prod_i lambda_i
  Rat lower;    // 2^n / n!
  Rat upper;    // 2^n
  bool pass = false;
};

// Exact two-sided volume-times-minima bound for a unimodular lattice. A
// failure indicates an implementation bug, never bad input.
MinkowskiReport minkowski_check(const SymmetricBox& K, const LatticeBasis& L, Budget& budget);

struct SimplexCertificate {
  std::vector<RationalVector> points;
  int rank = 0;
  std::optional<AffinePlane> plane;
  bool hypothesis_ok = false;
};

// Enumerates every r/s with R^n <= s < R^{n+1} whose weighted eps-zone meets
// the box E. hypothesis_ok records side(E)_i <= R^{-(1+u_i)(n+1)} / (d+1)!
// and eps < R^{-1} ((d+1)!)^{-1/u_1}; under it the points provably have
// affine rank <= d-1, which is asserted, and the fitted plane is returned.
SimplexCertificate simplex_certificate(const Box& E, long n, const Rat& R, const Vec& u,
                                       const Rat& eps, Budget& budget);

// Smallest q in [M, M*beta] with |x_i - p_i/q| <= M^{-(1+u_i)} beta^{-u_i} on
// every axis, where p_i is the integer nearest q*x_i (ties toward -infinity).
// Requires beta > 1/eps, and that no r/s with 1 <= s < M comes eps/s-close to
// x in the weighted norm; the violating r/s is reported when one exists.
RationalVector intermediate_approximation(const Vec& x, const Rat& M, const Rat& beta,
                                          const Vec& u, const Rat& eps, Budget& budget);

}  // namespace exactdim
