#include "exactdim/geometry.hpp"

#include <algorithm>

namespace exactdim {

Vec Box::center() const {
  Vec c(dim());
  for (std::size_t i = 0; i < dim(); ++i) c[i] = (lo[i] + hi[i]) / 2;
  return c;
}

Rat Box::volume() const {
  Rat v = 1;
  for (std::size_t i = 0; i < dim(); ++i) v *= side(i);
  return v;
}

bool Box::valid() const {
  if (lo.size() != hi.size() || lo.empty()) return false;
  for (std::size_t i = 0; i < dim(); ++i)
    if (!(lo[i] < hi[i])) return false;
  return true;
}

bool Box::contains_point(const Vec& x) const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (x[i] < lo[i] || x[i] >= hi[i]) return false;
  return true;
}

bool Box::contains_box(const Box& inner) const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (inner.lo[i] < lo[i] || inner.hi[i] > hi[i]) return false;
  return true;
}

bool Box::intersects_open(const Box& o) const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (!(std::max(lo[i], o.lo[i]) < std::min(hi[i], o.hi[i]))) return false;
  return true;
}

Vec RationalVector::value() const {
  Vec v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    v[i] = frac(p[i], q);
    v[i].canonicalize();
  }
  return v;
}

int rref(std::vector<Vec>& rows) {
  if (rows.empty()) return 0;
  std::size_t cols = rows[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
    std::size_t piv = r;
    while (piv < rows.size() && rows[piv][c] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[r], rows[piv]);
    Rat inv = 1 / rows[r][c];
    for (std::size_t j = c; j < cols; ++j) rows[r][j] *= inv;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c] == 0) continue;
      Rat f = rows[i][c];
      for (std::size_t j = c; j < cols; ++j) rows[i][j] -= f * rows[r][j];
    }
    ++r;
  }
  rows.resize(r);
  return (int)r;
}

namespace {

// Generalized cross product: the vector orthogonal to d-1 independent rows,
// by cofactor expansion along an appended symbolic row.
Vec normal_of(const std::vector<Vec>& rows, std::size_t d) {
  auto det = [](std::vector<Vec> m) -> Rat {
    Rat sign = 1, res = 1;
    std::size_t n = m.size();
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      while (piv < n && m[piv][c] == 0) ++piv;
      if (piv == n) return Rat(0);
      if (piv != c) {
        std::swap(m[piv], m[c]);
        sign = -sign;
      }
      res *= m[c][c];
      Rat inv = 1 / m[c][c];
      for (std::size_t i = c + 1; i < n; ++i) {
        if (m[i][c] == 0) continue;
        Rat f = m[i][c] * inv;
        for (std::size_t j = c; j < n; ++j) m[i][j] -= f * m[c][j];
      }
    }
    return sign * res;
  };
  Vec a(d);
  Rat sign = 1;
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<Vec> minor;
    for (auto& row : rows) {
      Vec mrow;
      for (std::size_t c = 0; c < d; ++c)
        if (c != j) mrow.push_back(row[c]);
      minor.push_back(mrow);
    }
    a[j] = sign * det(minor);
    sign = -sign;
  }
  return a;
}

void canonicalize_plane(AffinePlane& pl) {
  Int l = 1;
  for (auto& x : pl.a) {
    Int d = x.get_den(), g;
    mpz_gcd(g.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
    l = l / g * d;
  }
  for (auto& x : pl.a) x *= Rat(l);
  pl.b *= Rat(l);
  Int g = 0;
  for (auto& x : pl.a) {
    Int n = x.get_num();
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
  }
  if (g > 1) {
    for (auto& x : pl.a) x /= Rat(g);
    pl.b /= Rat(g);
  }
  for (auto& x : pl.a) {
    if (x == 0) continue;
    if (x < 0) {
      for (auto& y : pl.a) y = -y;
      pl.b = -pl.b;
    }
    break;
  }
}

}  // namespace

HullResult affine_hull(const std::vector<Vec>& points, std::size_t d) {
  HullResult res;
  if (points.empty()) {
    AffinePlane pl;
    pl.a = Vec(d, Rat(0));
    pl.a[0] = 1;
    pl.b = 0;
    res.rank = 0;
    res.plane = pl;
    return res;
  }
  std::vector<Vec> rows;
  for (std::size_t i = 1; i < points.size(); ++i) {
    Vec diff(d);
    for (std::size_t j = 0; j < d; ++j) diff[j] = points[i][j] - points[0][j];
    rows.push_back(diff);
  }
  res.rank = rref(rows);
  if ((std::size_t)res.rank > d - 1) return res;
  // complete the direction space to dimension d-1 with coordinate axes at
  // the non-pivot columns (always independent of an echelon row space)
  std::vector<bool> pivot(d, false);
  for (auto& row : rows)
    for (std::size_t j = 0; j < d; ++j)
      if (row[j] != 0) {
        pivot[j] = true;
        break;
      }
  for (std::size_t j = 0; j < d && rows.size() < d - 1; ++j) {
    if (pivot[j]) continue;
    Vec e(d, Rat(0));
    e[j] = 1;
    rows.push_back(e);
    pivot[j] = true;
  }
  AffinePlane pl;
  pl.a = normal_of(rows, d);
  bool zero = true;
  for (auto& x : pl.a) zero = zero && x == 0;
  if (zero) throw std::logic_error("degenerate normal in affine_hull");
  pl.b = 0;
  for (std::size_t j = 0; j < d; ++j) pl.b += pl.a[j] * points[0][j];
  canonicalize_plane(pl);
  for (auto& pt : points) {
    Rat s = -pl.b;
    for (std::size_t j = 0; j < d; ++j) s += pl.a[j] * pt[j];
    if (s != 0) throw std::logic_error("affine_hull plane misses an input point");
  }
  res.plane = pl;
  return res;
}

bool plane_meets_box(const AffinePlane& plane, const Vec& center, const Vec& radii) {
  Rat lhs = -plane.b, width = 0;
  for (std::size_t i = 0; i < center.size(); ++i) {
    lhs += plane.a[i] * center[i];
    width += rat_abs(plane.a[i]) * radii[i];
  }
  return rat_abs(lhs) <= width;
}

Subdivision subdivide(const Box& E, const Vec& side, unsigned anchor, Budget* budget) {
  std::size_t d = E.dim();
  struct Seg {
    Rat lo, hi;
    bool full;
  };
  std::vector<std::vector<Seg>> segs(d);
  unsigned long total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (side[i] <= 0) throw ConfigError("subdivision side must be positive");
    Rat len = E.side(i);
    Int count = rat_floor(len / side[i]);
    if (count < 1) throw ConfigError("subdivision side exceeds box side");
    if (!count.fits_ulong_p()) throw BudgetExceeded("subdivision too fine");
    unsigned long c = count.get_ui();
    Rat rem = len - Rat(count) * side[i];
    bool high = (anchor >> i) & 1u;
    auto& s = segs[i];
    if (high && rem > 0) s.push_back({E.lo[i], E.lo[i] + rem, false});
    Rat base = high ? E.lo[i] + rem : E.lo[i];
    for (unsigned long j = 0; j < c; ++j)
      s.push_back({base + Rat(j) * side[i], base + Rat(j + 1) * side[i], true});
    if (!high && rem > 0) s.push_back({E.hi[i] - rem, E.hi[i], false});
    total *= s.size();
    if (budget) budget->charge(s.size());
  }
  if (budget) budget->charge(total);
  Subdivision out;
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    Box b;
    b.lo.resize(d);
    b.hi.resize(d);
    bool full = true;
    for (std::size_t i = 0; i < d; ++i) {
      auto& s = segs[i][idx[i]];
      b.lo[i] = s.lo;
      b.hi[i] = s.hi;
      full = full && s.full;
    }
    (full ? out.full : out.remainder).push_back(std::move(b));
    std::size_t ax = d;
    while (ax > 0) {
      --ax;
      if (++idx[ax] < segs[ax].size()) break;
      idx[ax] = 0;
      if (ax == 0) return out;
    }
  }
}

Box grid_cell(const Box& parent, const Vec& side, const std::vector<long>& idx) {
  std::size_t d = parent.dim();
  Box b;
  b.lo.resize(d);
  b.hi.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (idx[i] < 0) {
      b.hi[i] = parent.hi[i];
      b.lo[i] = parent.hi[i] - side[i];
    } else {
      b.lo[i] = parent.lo[i] + Rat(idx[i]) * side[i];
      b.hi[i] = b.lo[i] + side[i];
    }
  }
  return b;
}

}  // namespace exactdim
