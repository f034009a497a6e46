#include "exactdim/lattice.hpp"

#include <algorithm>

#include "exactdim/power_product.hpp"

namespace exactdim {

namespace {

using Mat = std::vector<Vec>;

// rows of the basis matrix whose columns are the generators
Mat basis_rows(const LatticeBasis& L) {
  const std::size_t n = L.dim();
  Mat m(n, Vec(n, Rat(0)));
  for (std::size_t j = 0; j < n; ++j) {
    if (L.basis[j].size() != n) throw ConfigError("lattice basis is not square");
    for (std::size_t i = 0; i < n; ++i) m[i][j] = L.basis[j][i];
  }
  return m;
}

Rat det_of(Mat m) {
  const std::size_t n = m.size();
  Rat det(1);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && m[piv][col] == 0) ++piv;
    if (piv == n) return Rat(0);
    if (piv != col) {
      std::swap(m[piv], m[col]);
      det = -det;
    }
    det *= m[col][col];
    Rat inv_p = Rat(1) / m[col][col];
    for (std::size_t j = col; j < n; ++j) m[col][j] *= inv_p;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (m[r][col] == 0) continue;
      Rat f = m[r][col];
      for (std::size_t j = col; j < n; ++j) m[r][j] -= f * m[col][j];
    }
  }
  return det;
}

// empty result = singular
Mat invert(Mat m) {
  const std::size_t n = m.size();
  Mat inv(n, Vec(n, Rat(0)));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && m[piv][col] == 0) ++piv;
    if (piv == n) return {};
    std::swap(m[piv], m[col]);
    std::swap(inv[piv], inv[col]);
    Rat p = m[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      m[col][j] /= p;
      inv[col][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || m[r][col] == 0) continue;
      Rat f = m[r][col];
      for (std::size_t j = 0; j < n; ++j) {
        m[r][j] -= f * m[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

struct GaugedPoint {
  Rat gauge;
  Vec v;
};

bool gauged_less(const GaugedPoint& a, const GaugedPoint& b) {
  if (a.gauge != b.gauge) return a.gauge < b.gauge;
  return std::lexicographical_compare(a.v.begin(), a.v.end(), b.v.begin(), b.v.end());
}

// negate so the first nonzero entry is positive; v and -v carry the same gauge
void sign_canonicalize(Vec& v) {
  for (const Rat& c : v) {
    if (c == 0) continue;
    if (c < 0)
      for (Rat& e : v) e = -e;
    return;
  }
}

// All nonzero lattice points with gauge <= bound, sign-canonical, deduped,
// sorted by (gauge, lexicographic). The first n-1 coefficients range over the
// window |z_j| <= sum_k |inv_jk| bound radii_k; the last coefficient is cut
// to its exact feasible interval per prefix, so every emitted point is in
// bound*K by construction.
std::vector<GaugedPoint> enumerate_points(const SymmetricBox& K, const LatticeBasis& L,
                                          const Rat& bound, Budget& budget) {
  const std::size_t n = K.dim();
  Mat inv = invert(basis_rows(L));
  if (inv.empty()) throw ConfigError("lattice basis is singular");

  Vec bc(n);
  for (std::size_t i = 0; i < n; ++i) bc[i] = bound * K.radii[i];
  std::vector<Int> zmax(n);
  for (std::size_t j = 0; j < n; ++j) {
    Rat zj(0);
    for (std::size_t k = 0; k < n; ++k) zj += rat_abs(inv[j][k]) * bc[k];
    zmax[j] = rat_floor(zj);
    if (zmax[j] < 0) zmax[j] = 0;
  }

  const Vec& g = L.basis[n - 1];
  std::vector<GaugedPoint> out;
  std::vector<Int> z(n > 1 ? n - 1 : 0);
  for (std::size_t j = 0; j + 1 < n; ++j) z[j] = -zmax[j];
  while (true) {
    budget.charge();
    Vec partial(n, Rat(0));
    for (std::size_t j = 0; j + 1 < n; ++j)
      for (std::size_t i = 0; i < n; ++i) partial[i] += Rat(z[j]) * L.basis[j][i];

    // |partial_i + t g_i| <= bc_i clips the last coefficient t
    bool feasible = true;
    bool have_lo = false, have_hi = false;
    Rat tlo, thi;
    for (std::size_t i = 0; i < n && feasible; ++i) {
      if (g[i] == 0) {
        if (rat_abs(partial[i]) > bc[i]) feasible = false;
        continue;
      }
      Rat a = (-bc[i] - partial[i]) / g[i];
      Rat b = (bc[i] - partial[i]) / g[i];
      if (g[i] < 0) std::swap(a, b);
      if (!have_lo || a > tlo) tlo = a, have_lo = true;
      if (!have_hi || b < thi) thi = b, have_hi = true;
    }
    if (!have_lo || !have_hi) throw ConfigError("lattice basis is singular");
    if (feasible) {
      for (Int t = rat_ceil(tlo), t_end = rat_floor(thi); t <= t_end; ++t) {
        budget.charge();
        Vec v(n);
        bool zero = true;
        for (std::size_t i = 0; i < n; ++i) {
          v[i] = partial[i] + Rat(t) * g[i];
          if (v[i] != 0) zero = false;
        }
        if (zero) continue;
        Rat gauge = K.gauge(v);
        sign_canonicalize(v);
        out.push_back({gauge, std::move(v)});
      }
    }

    std::size_t axis = n - (n > 0 ? 1 : 0);
    bool done = (n <= 1);
    while (axis > 0) {
      --axis;
      if (z[axis] < zmax[axis]) {
        ++z[axis];
        for (std::size_t j = axis + 1; j + 1 < n; ++j) z[j] = -zmax[j];
        break;
      }
      if (axis == 0) done = true;
    }
    if (done) break;
  }
  std::sort(out.begin(), out.end(), gauged_less);
  out.erase(std::unique(out.begin(), out.end(),
                        [](const GaugedPoint& a, const GaugedPoint& b) { return a.v == b.v; }),
            out.end());
  return out;
}

// smallest power of two >= x (x > 0)
Rat pow2_upper(const PowerProduct& x) {
  auto [lo, hi] = x.log2_range(64);
  Int e = rat_ceil(hi);
  if (!e.fits_slong_p()) throw ConfigError("enumeration bound out of range");
  return rat_pow(Rat(2), e.get_si());
}

int rank_with(const std::vector<Vec>& picked, const Vec& cand) {
  std::vector<Vec> rows = picked;
  rows.push_back(cand);
  return rref(rows);
}

Int tie_low_nearest(const Rat& x) { return rat_ceil(x - Rat(1, 2)); }

}  // namespace

Rat SymmetricBox::volume() const {
  Rat v(1);
  for (const Rat& r : radii) v *= 2 * r;
  return v;
}

Rat SymmetricBox::gauge(const Vec& v) const {
  Rat g(0);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    Rat gi = rat_abs(v[i]) / radii[i];
    if (gi > g) g = gi;
  }
  return g;
}

Rat basis_determinant(const LatticeBasis& L) { return det_of(basis_rows(L)); }

LatticeBasis shear_lattice(const Vec& x, bool lemma_convention) {
  const std::size_t d = x.size();
  LatticeBasis L;
  L.basis.assign(d + 1, Vec(d + 1, Rat(0)));
  for (std::size_t j = 0; j < d; ++j) L.basis[j][j] = lemma_convention ? -1 : 1;
  for (std::size_t i = 0; i < d; ++i) L.basis[d][i] = x[i];
  L.basis[d][d] = 1;
  return L;
}

MinimaReport successive_minima(const SymmetricBox& K, const LatticeBasis& L, Budget& budget) {
  const std::size_t n = K.dim();
  if (n == 0 || n > 4) throw ConfigError("successive minima support dimensions 1 through 4");
  if (L.dim() != n) throw ConfigError("body and lattice dimensions differ");
  for (const Rat& r : K.radii)
    if (r <= 0) throw ConfigError("degenerate symmetric box");

  Rat det = rat_abs(basis_determinant(L));
  if (det == 0) throw ConfigError("lattice basis is singular");
  Rat prod_radii(1);
  for (const Rat& r : K.radii) prod_radii *= r;

  // lambda_1^n vol(K) <= 2^n det guarantees a point within this dilate;
  // doubling then reaches lambda_n without a worst-case window up front
  Rat bound = pow2_upper(pp_pow(det / prod_radii, frac(1, Int(n))));
  for (int round = 0;; ++round) {
    std::vector<GaugedPoint> pts = enumerate_points(K, L, bound, budget);
    if (round == 0 && pts.empty())
      throw std::logic_error("first-minimum enclosure holds no lattice point");
    MinimaReport rep;
    std::vector<Vec> picked;
    for (const GaugedPoint& gp : pts) {
      if (picked.size() == n) break;
      if (rank_with(picked, gp.v) == int(picked.size()) + 1) {
        picked.push_back(gp.v);
        rep.lambda.push_back(gp.gauge);
        rep.witnesses.push_back(gp.v);
      }
    }
    if (picked.size() == n) return rep;
    if (round > 300) throw std::logic_error("independent lattice directions not found");
    // prod lambda_i <= det / prod radii and lambda_i >= lambda_k for i > k
    // bound lambda_n from the k minima already certain; cap growth at 2x
    Rat next = bound * 2;
    if (!picked.empty()) {
      Rat mink = det / prod_radii;
      for (const Rat& l : rep.lambda) mink /= l;
      for (std::size_t i = picked.size(); i + 1 < n; ++i) mink /= rep.lambda.back();
      if (mink < next) next = mink;
    }
    bound = next;
  }
}

MinkowskiReport minkowski_check(const SymmetricBox& K, const LatticeBasis& L, Budget& budget) {
  Rat det = rat_abs(basis_determinant(L));
  if (det != 1) throw ConfigError("minkowski_check requires a unimodular lattice");
  MinimaReport minima = successive_minima(K, L, budget);
  const std::size_t n = K.dim();
  MinkowskiReport rep;
  rep.product = K.volume();
  for (const Rat& l : minima.lambda) rep.product *= l;
  rep.lower = frac(rat_pow(Rat(2), long(n)).get_num(), factorial(unsigned(n)));
  rep.upper = rat_pow(Rat(2), long(n));
  rep.pass = rep.lower <= rep.product && rep.product <= rep.upper;
  return rep;
}

SimplexCertificate simplex_certificate(const Box& E, long n, const Rat& R, const Vec& u,
                                       const Rat& eps, Budget& budget) {
  const std::size_t d = E.dim();
  if (!E.valid() || d == 0) throw ConfigError("invalid box");
  if (u.size() != d) throw ConfigError("weight count does not match box dimension");
  validate_norm_weights(u);
  if (R <= 1) throw ConfigError("R must exceed 1");
  if (eps <= 0) throw ConfigError("eps must be positive");
  if (n < 0) throw ConfigError("n must be nonnegative");

  const Rat fact(factorial(unsigned(d + 1)));
  SimplexCertificate cert;
  cert.hypothesis_ok = true;
  for (std::size_t i = 0; i < d; ++i) {
    // side_i <= R^{-(1+u_i)(n+1)} / (d+1)!  cleared of the rational exponent
    PowerProduct cap = pp_pow(R, -(1 + u[i]) * Rat(n + 1));
    if (cap.cmp(Rat(E.side(i) * fact)) < 0) cert.hypothesis_ok = false;
  }
  PowerProduct eps_cap = pp_pow(R, Rat(-1)) * pp_pow(fact, Rat(-1) / u[0]);
  if (eps_cap.cmp(eps) <= 0) cert.hypothesis_ok = false;

  Int s_lo = rat_ceil(rat_pow(R, n));
  Int s_hi = rat_ceil(rat_pow(R, n + 1));
  cert.points = dangerous_rationals(E, s_lo, s_hi, u, eps, budget);

  std::vector<Vec> values;
  values.reserve(cert.points.size());
  for (const RationalVector& rv : cert.points) values.push_back(rv.value());
  HullResult hull = affine_hull(values, d);
  cert.rank = hull.rank;
  cert.plane = hull.plane;
  if (cert.hypothesis_ok && cert.rank > int(d) - 1)
    throw std::logic_error("dangerous rationals span full rank under the coplanarity hypothesis");
  return cert;
}

RationalVector intermediate_approximation(const Vec& x, const Rat& M, const Rat& beta,
                                          const Vec& u, const Rat& eps, Budget& budget) {
  const std::size_t d = x.size();
  if (d == 0) throw ConfigError("empty point");
  if (u.size() != d) throw ConfigError("weight count does not match point dimension");
  validate_norm_weights(u);
  if (M <= 1) throw ConfigError("M must exceed 1");
  if (eps <= 0) throw ConfigError("eps must be positive");
  if (beta * eps <= 1) throw ConfigError("beta must exceed 1/eps");

  // every s < M must keep x at weighted distance >= eps/s from s-denominator
  // rationals; the per-axis nearest numerator minimizes the norm
  for (Int s = 1; s < M; ++s) {
    budget.charge(d);
    Vec y(d);
    std::vector<Int> r(d);
    for (std::size_t i = 0; i < d; ++i) {
      r[i] = nearest_int(Rat(s) * x[i]);
      y[i] = Rat(s) * x[i] - Rat(r[i]);
    }
    if (weighted_norm_cmp(y, u, eps / Rat(s)) < 0) {
      std::string num;
      for (std::size_t i = 0; i < d; ++i) num += (i ? "," : "") + r[i].get_str();
      throw PreconditionViolation("x is approximable below eps/s by (" + num + ")/" +
                                  s.get_str());
    }
  }

  Int q_hi = rat_floor(M * beta);
  for (Int q = rat_ceil(M); q <= q_hi; ++q) {
    std::vector<Int> p(d);
    bool ok = true;
    for (std::size_t i = 0; i < d && ok; ++i) {
      budget.charge();
      p[i] = tie_low_nearest(Rat(q) * x[i]);
      Rat diff = rat_abs(x[i] - frac(p[i], q));
      // |x_i - p_i/q| <= M^{-(1+u_i)} beta^{-u_i}, cleared by the u_i denominator
      long a = long(u[i].get_num().get_si());
      long b = long(u[i].get_den().get_si());
      if (rat_pow(diff, b) * rat_pow(M, b + a) * rat_pow(beta, a) > 1) ok = false;
    }
    if (ok) return RationalVector{std::move(p), q};
  }
  throw std::logic_error("no admissible denominator in [M, M beta]");
}

}  // namespace exactdim
