#include "exactdim/weighted_norm.hpp"

#include <algorithm>

namespace exactdim {

void validate_norm_weights(const Vec& u) {
  if (u.empty()) throw ConfigError("empty weight vector");
  for (auto& ui : u)
    if (!(ui > 0 && ui <= 1)) throw ConfigError("norm weight outside (0,1]: " + rat_str(ui));
}

namespace {

unsigned long small_ui(const Int& n, const char* what) {
  if (!n.fits_ulong_p()) throw BudgetExceeded(std::string("exponent too large in ") + what);
  return n.get_ui();
}

// sign of |t|^{1/u} - c for c > 0: cleared to |t|^b vs c^a with u = a/b
int axis_cmp(const Rat& t, const Rat& u, const Rat& c) {
  Rat at = rat_abs(t);
  if (at == 0) return -1;
  unsigned long a = small_ui(u.get_num(), "norm weight");
  unsigned long b = small_ui(u.get_den(), "norm weight");
  Rat lhs = rat_pow(at, (long)b);
  Rat rhs = rat_pow(c, (long)a);
  return lhs < rhs ? -1 : (lhs == rhs ? 0 : 1);
}

}  // namespace

int weighted_norm_cmp(const Vec& x, const Vec& u, const Rat& c) {
  validate_norm_weights(u);
  if (x.size() != u.size()) throw ConfigError("vector/weight length mismatch");
  if (!(c > 0)) throw ConfigError("norm comparison bound must be positive");
  int best = -1;
  for (std::size_t i = 0; i < x.size(); ++i) best = std::max(best, axis_cmp(x[i], u[i], c));
  return best;
}

Rat weighted_norm_approx(const Vec& x, const Vec& u, unsigned precision) {
  validate_norm_weights(u);
  if (x.size() != u.size()) throw ConfigError("vector/weight length mismatch");
  // exact argmax axis via power-product comparison of |x_i|^{1/u_i}
  std::size_t arg = x.size();
  PowerProduct best;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0) continue;
    PowerProduct term = pp(rat_abs(x[i])).pow(Rat(1) / u[i]);
    if (arg == x.size() || term.cmp(best) > 0) {
      arg = i;
      best = term;
    }
  }
  if (arg == x.size()) return Rat(0);
  unsigned long a = small_ui(u[arg].get_num(), "norm weight");
  unsigned long b = small_ui(u[arg].get_den(), "norm weight");
  Rat base = rat_pow(rat_abs(x[arg]), (long)b);  // value = base^{1/a}
  Int rn, rd;
  if (iroot_exact(base.get_num(), a, rn) && iroot_exact(base.get_den(), a, rd)) {
    Rat exact(rn, rd);
    exact.canonicalize();
    return exact;
  }
  // dyadic bisection certified by exact comparisons
  Rat lo = 0, hi = 1;
  while (best.cmp(hi) > 0) hi *= 2;
  Rat tol = rat_pow(Rat(1, 10), (long)precision);
  while (hi - lo > tol) {
    Rat mid = (lo + hi) / 2;
    if (best.cmp(mid) >= 0)
      lo = mid;
    else
      hi = mid;
  }
  return (lo + hi) / 2;
}

std::vector<RationalVector> dangerous_rationals(const Box& E, const Int& s_lo, const Int& s_hi,
                                                const Vec& u, const Rat& eps, Budget& budget) {
  validate_norm_weights(u);
  if (!E.valid()) throw ConfigError("invalid box");
  if (E.dim() != u.size()) throw ConfigError("box/weight dimension mismatch");
  if (!(s_lo >= 1 && s_lo < s_hi)) throw ConfigError("need 1 <= s_lo < s_hi");
  if (!(eps > 0)) throw ConfigError("eps must be positive");
  std::size_t d = E.dim();
  std::vector<RationalVector> out;
  for (Int s = s_lo; s < s_hi; ++s) {
    budget.charge();
    Rat es = eps / Rat(s);
    // loose per-axis candidate bound: (eps/s)^{u_i} <= max(1, eps/s)
    Rat B = es < 1 ? Rat(1) : es;
    std::vector<std::vector<Int>> pass(d);
    bool feasible = true;
    for (std::size_t i = 0; i < d && feasible; ++i) {
      unsigned long a = small_ui(u[i].get_num(), "norm weight");
      unsigned long b = small_ui(u[i].get_den(), "norm weight");
      Rat rhs = rat_pow(es, (long)a);
      Int r_lo = rat_ceil(Rat(s) * E.lo[i] - B);
      Int r_hi = rat_floor(Rat(s) * E.hi[i] + B);
      for (Int r = r_lo; r <= r_hi; ++r) {
        budget.charge();
        // distance from r to the interval [s*lo_i, s*hi_i]
        Rat dist = 0;
        if (Rat(r) < Rat(s) * E.lo[i]) dist = Rat(s) * E.lo[i] - Rat(r);
        if (Rat(r) > Rat(s) * E.hi[i]) dist = Rat(r) - Rat(s) * E.hi[i];
        if (rat_pow(dist, (long)b) <= rhs) pass[i].push_back(r);
      }
      feasible = !pass[i].empty();
    }
    if (!feasible) continue;
    std::vector<std::size_t> idx(d, 0);
    while (true) {
      budget.charge();
      RationalVector rv;
      rv.q = s;
      rv.p.resize(d);
      for (std::size_t i = 0; i < d; ++i) rv.p[i] = pass[i][idx[i]];
      out.push_back(std::move(rv));
      std::size_t ax = d;
      bool done = false;
      while (ax > 0) {
        --ax;
        if (++idx[ax] < pass[ax].size()) break;
        idx[ax] = 0;
        if (ax == 0) done = true;
      }
      if (done) break;
    }
  }
  return out;
}

}  // namespace exactdim
