#pragma once

#include <optional>
#include <vector>

#include "exactdim/rational.hpp"

namespace exactdim {

// Axis-parallel box, treated as the half-open cell prod [lo_i, hi_i) when
// used as a member of a partition, and as its closure in intersection tests
// that are deliberately conservative.
struct Box {
  Vec lo, hi;
  std::size_t dim() const { return lo.size(); }
  Rat side(std::size_t i) const { return hi[i] - lo[i]; }
  Vec center() const;
  Rat volume() const;
  bool valid() const;
  bool contains_point(const Vec& x) const;        // lo <= x < hi
  bool contains_box(const Box& inner) const;      // as subsets of R^d
  bool intersects_open(const Box& o) const;       // interiors meet
};

// p/q in Q^d.
struct RationalVector {
  std::vector<Int> p;
  Int q{1};
  Vec value() const;
};

// The locus a . z = b with a canonical: coprime integer entries, first
// nonzero entry positive.
struct AffinePlane {
  Vec a;
  Rat b;
};

struct HullResult {
  int rank = 0;
  std::optional<AffinePlane> plane;
};

// Affine rank of the points plus a deterministic plane through them when
// rank <= d-1 (missing directions completed by smallest-index coordinate
// axes). Empty input gives the canonical plane x_1 = 0.
HullResult affine_hull(const std::vector<Vec>& points, std::size_t d);

// True iff {x : |x_i - center_i| <= radii_i} meets the plane; exact support
// test |a.center - b| <= sum |a_i| radii_i.
bool plane_meets_box(const AffinePlane& plane, const Vec& center, const Vec& radii);

struct Subdivision {
  std::vector<Box> full;
  std::vector<Box> remainder;
};

// Grid of side-length `side` cells anchored at a corner of E (anchor bit i
// set = anchor the i-th axis at hi_i), plus remainder boxes tiling the rest.
// Cells are emitted row-major with the last axis fastest, ascending
// coordinates; a cell is full iff every axis segment has exact side length.
Subdivision subdivide(const Box& E, const Vec& side, unsigned anchor = 0, Budget* budget = nullptr);

// Cell of the anchored-low grid over `parent` with per-axis index idx_i;
// idx_i = -1 selects the cell flushed against the parent's upper face.
Box grid_cell(const Box& parent, const Vec& side, const std::vector<long>& idx);

// Exact row reduction; returns the rank and leaves `rows` in reduced
// echelon form (pivots 1, pivot columns cleared).
int rref(std::vector<Vec>& rows);

}  // namespace exactdim
