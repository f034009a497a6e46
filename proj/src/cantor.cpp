#include "exactdim/cantor.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include "exactdim/lattice.hpp"
#include "exactdim/power_product.hpp"
#include "exactdim/weighted_norm.hpp"

namespace exactdim::cantor {

using schedule::Mode;
using schedule::ParameterSchedule;

namespace {

long to_long(const Int& v, const char* what) {
  if (!v.fits_slong_p()) throw ConfigError(std::string(what) + " does not fit a machine integer");
  return v.get_si();
}

unsigned long to_ulong(const Int& v, const char* what) {
  if (sgn(v) < 0 || !v.fits_ulong_p())
    throw ConfigError(std::string(what) + " is not a small nonnegative integer");
  return v.get_ui();
}

Rat pp_rat(const PowerProduct& x, const char* what) {
  if (!x.is_rational())
    throw ConfigError(std::string(what) +
                      " is irrational; materializing the family needs rational toy constants");
  return x.to_rational();
}

// base^e for rational e, exact. A rational result always factors through the
// exact den(e)-th root of base, so failure of the root means the power is
// irrational.
Rat rat_power(const Rat& base, const Rat& e, const char* what) {
  if (sgn(base) <= 0) throw ConfigError(std::string(what) + ": power of a nonpositive base");
  long num = to_long(Int(e.get_num()), what);
  unsigned long den = to_ulong(Int(e.get_den()), what);
  Rat root = base;
  if (den != 1) {
    Int rn, rd;
    if (!iroot_exact(Int(base.get_num()), den, rn) || !iroot_exact(Int(base.get_den()), den, rd))
      throw ConfigError(std::string(what) + ": " + rat_str(base) + "^(" + rat_str(e) +
                        ") is irrational; toy runs need rational grid constants");
    root = frac(rn, rd);
  }
  return rat_pow(root, num);
}

// Product of positive rational bases raised to rational exponents, compared
// with c by clearing the exponents; returns the sign of lhs - c.
struct PowFactor {
  Rat base;
  Rat exp;
};

int prodpow_cmp(const std::vector<PowFactor>& fs, const Rat& c) {
  if (sgn(c) <= 0) return 1;
  Int L(1);
  for (const auto& f : fs) {
    Int den(f.exp.get_den());
    mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), den.get_mpz_t());
  }
  long cleared = to_long(L, "cleared exponent");
  Rat lhs(1);
  for (const auto& f : fs) {
    Int scaled = Int(f.exp.get_num()) * (L / Int(f.exp.get_den()));
    lhs *= rat_pow(f.base, to_long(scaled, "cleared exponent"));
  }
  return cmp(lhs, rat_pow(c, cleared));
}

bool pow_ge(const std::vector<PowFactor>& t, const Rat& c) {
  return sgn(c) <= 0 || prodpow_cmp(t, c) >= 0;
}

bool pow_gt(const std::vector<PowFactor>& t, const Rat& c) {
  return sgn(c) <= 0 || prodpow_cmp(t, c) > 0;
}

// Threshold tests for |s*x - r| against a factored bound t, x ranging over a
// box edge. The half-open form attains its lower endpoint only.
bool axis_meets_half_open(const Int& s, const Int& r, const Rat& lo, const Rat& hi,
                          const std::vector<PowFactor>& t) {
  return pow_ge(t, Rat(s) * lo - Rat(r)) && pow_gt(t, Rat(r) - Rat(s) * hi);
}

bool axis_meets_closed(const Int& s, const Int& r, const Rat& lo, const Rat& hi,
                       const std::vector<PowFactor>& t) {
  return pow_ge(t, Rat(s) * lo - Rat(r)) && pow_ge(t, Rat(r) - Rat(s) * hi);
}

bool axis_meets_open(const Int& s, const Int& r, const Rat& lo, const Rat& hi,
                     const std::vector<PowFactor>& t) {
  return pow_gt(t, Rat(s) * lo - Rat(r)) && pow_gt(t, Rat(r) - Rat(s) * hi);
}

struct Stage {
  long n = 0;
  std::vector<long> n_i;
  long nd() const { return n_i.back(); }
};

Stage stage_of(const ParameterSchedule& s, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > s.levels.size())
    throw ConfigError("stage index out of range");
  const auto& lp = s.levels[static_cast<std::size_t>(k - 1)];
  Stage st;
  st.n = to_long(lp.n, "stage depth");
  for (const auto& v : lp.n_i) st.n_i.push_back(to_long(v, "stage depth"));
  return st;
}

// side of a tail-law cell on axis i at exponent e: rho0_i R^{-(1+wt_i) e}
Rat tail_side(const ParameterSchedule& s, std::size_t i, long e) {
  Rat expo = -(Rat(1) + s.aux.wtilde[i]) * Rat(e);
  return pp_rat(s.rho0[i], "rho0") * rat_power(s.R, expo, "grid side");
}

Vec level_sides(const ParameterSchedule& s, long l) {
  Vec side(s.d);
  if (l == 0) {
    for (std::size_t i = 0; i < s.d; ++i) side[i] = pp_rat(s.rho0[i], "rho0");
    return side;
  }
  Regime rg = level_regime(s, l);
  if (rg.tag == CaseTag::case2) {
    Stage st = stage_of(s, rg.k);
    for (std::size_t i = 0; i < s.d; ++i) side[i] = tail_side(s, i, std::min(l, st.n_i[i]));
  } else {
    for (std::size_t i = 0; i < s.d; ++i) side[i] = tail_side(s, i, l);
  }
  return side;
}

template <typename F>
void for_each_cell(const std::vector<long>& m, F&& f) {
  if (m.empty()) return;
  for (long v : m)
    if (v <= 0) return;
  std::vector<long> idx(m.size(), 0);
  while (true) {
    f(idx);
    std::size_t ax = m.size();
    while (true) {
      --ax;
      if (++idx[ax] < m[ax]) break;
      idx[ax] = 0;
      if (ax == 0) return;
    }
  }
}

std::vector<long> full_counts(const Box& E, const Vec& side) {
  std::vector<long> m(E.dim());
  for (std::size_t i = 0; i < E.dim(); ++i) {
    m[i] = to_long(rat_floor(E.side(i) / side[i]), "cells per axis");
    if (m[i] < 1) throw ConfigError("subdivision side exceeds the parent box side");
  }
  return m;
}

bool closed_overlap(const Box& a, const Box& b, Vec& lo, Vec& hi) {
  lo.resize(a.dim());
  hi.resize(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    lo[i] = std::max(a.lo[i], b.lo[i]);
    hi[i] = std::min(a.hi[i], b.hi[i]);
    if (lo[i] > hi[i]) return false;
  }
  return true;
}

std::string vec_str(const Vec& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += rat_str(v[i]);
  }
  return out + ")";
}

std::string ints_str(const std::vector<Int>& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += v[i].get_str();
  }
  return out + ")";
}

std::string box_str(const Box& b) {
  std::string out;
  for (std::size_t i = 0; i < b.dim(); ++i) {
    if (i) out += " x ";
    out += "[" + rat_str(b.lo[i]) + ", " + rat_str(b.hi[i]) + ")";
  }
  return out;
}

// Sweep over the dangerous zones of the band [R^{l-1}, R^l) with scale eps0.
// With a spanning plane the removal test thickens it by the widest zone
// radius of the band; without one each cell is tested against the per-point
// zones, which is exact but loses the slab-count guarantee.
struct BandSweep {
  const ParameterSchedule* sp = nullptr;
  bool fallback = false;
  std::vector<RationalVector> points;
  std::optional<AffinePlane> plane;
  Vec pad;
  Rat eps;

  bool empty() const { return !plane && points.empty(); }

  bool removes(const Box& cell, Budget& b) const {
    if (empty()) return false;
    b.charge();
    if (plane) {
      Vec radii(cell.dim());
      for (std::size_t i = 0; i < cell.dim(); ++i) radii[i] = cell.side(i) / 2 + pad[i];
      return plane_meets_box(*plane, cell.center(), radii);
    }
    const Vec& wt = sp->aux.wtilde;
    for (const auto& pt : points) {
      b.charge();
      bool all = true;
      for (std::size_t i = 0; i < cell.dim() && all; ++i) {
        std::vector<PowFactor> t{{eps / Rat(pt.q), wt[i]}};
        all = axis_meets_closed(pt.q, pt.p[i], cell.lo[i], cell.hi[i], t);
      }
      if (all) return true;
    }
    return false;
  }
};

BandSweep make_band_sweep(const ParameterSchedule& s, const Box& E, long l, Budget& b) {
  BandSweep sw;
  sw.sp = &s;
  sw.eps = pp_rat(s.eps0, "eps0");
  auto cert = simplex_certificate(E, l - 1, s.R, s.aux.wtilde, sw.eps, b);
  if (cert.points.empty()) return sw;
  if (cert.plane) {
    sw.plane = cert.plane;
    sw.pad.resize(s.d);
    for (std::size_t i = 0; i < s.d; ++i) {
      Rat scale = rat_power(sw.eps, s.aux.wtilde[i], "zone pad");
      sw.pad[i] =
          scale * rat_power(s.R, -(Rat(1) + s.aux.wtilde[i]) * Rat(l - 1), "zone pad");
    }
  } else {
    sw.fallback = true;
    sw.points = std::move(cert.points);
  }
  return sw;
}

void add_row(VerdictReport& rep, std::string name, bool pass, bool diagnostic,
             std::string witness) {
  if (!diagnostic && !pass) rep.all_pass = false;
  rep.rows.push_back(VerifyRow{std::move(name), pass, diagnostic, std::move(witness)});
}

// integers s with R^a <= s < R^b
std::pair<Int, Int> band_range(const Rat& R, long a, long b) {
  Int lo = rat_ceil(rat_pow(R, a));
  Int hi = rat_ceil(rat_pow(R, b)) - 1;
  return {lo, hi};
}

// True when no r/s in the band has its zone |s x - r|_i <= thr(s, i) meeting
// the half-open box. On failure writes the witness and, budget permitting, a
// concrete rational point of the box inside the zone.
template <typename ThrFn>
bool box_band_clear(const ParameterSchedule& sp, const Box& box, const Int& s_lo,
                    const Int& s_hi, ThrFn&& thr, const Approximation* skip, Budget& b,
                    int samples, std::string& witness) {
  std::size_t d = box.dim();
  for (Int sv = s_lo; sv <= s_hi; ++sv) {
    b.charge();
    // every zone scanned here has sx-space radius at most 1
    std::vector<Int> base(d);
    std::vector<long> m(d);
    bool feasible = true;
    for (std::size_t i = 0; i < d && feasible; ++i) {
      base[i] = rat_ceil(Rat(sv) * box.lo[i] - 1);
      Int top = rat_floor(Rat(sv) * box.hi[i] + 1);
      if (top < base[i]) feasible = false;
      else m[i] = to_long(Int(top - base[i] + 1), "candidate count");
    }
    if (!feasible) continue;
    bool violated = false;
    std::vector<Int> bad(d);
    for_each_cell(m, [&](const std::vector<long>& idx) {
      if (violated) return;
      std::vector<Int> r(d);
      for (std::size_t i = 0; i < d; ++i) r[i] = base[i] + idx[i];
      if (skip) {
        bool same = true;
        for (std::size_t i = 0; i < d && same; ++i) same = r[i] * skip->q == skip->p[i] * sv;
        if (same) return;
      }
      bool all = true;
      for (std::size_t i = 0; i < d && all; ++i)
        all = axis_meets_half_open(sv, r[i], box.lo[i], box.hi[i], thr(sv, i));
      if (all) {
        violated = true;
        bad = r;
      }
    });
    if (violated) {
      witness = "s=" + sv.get_str() + ", r=" + ints_str(bad);
      if (samples > 0) {
        Vec x(d);
        bool have = true;
        for (std::size_t i = 0; i < d && have; ++i) {
          Rat rs = Rat(bad[i]) / Rat(sv);
          if (rs >= box.lo[i] && rs < box.hi[i]) {
            x[i] = rs;
          } else if (rs < box.lo[i]) {
            x[i] = box.lo[i];
          } else {
            have = false;
            Rat step = box.side(i) / 2;
            for (int it = 0; it < 80; ++it, step /= 2) {
              Rat cand = box.hi[i] - step;
              if (cand < box.lo[i]) continue;
              if (pow_ge(thr(sv, i), rat_abs(Rat(sv) * cand - Rat(bad[i])))) {
                x[i] = cand;
                have = true;
                break;
              }
            }
          }
        }
        if (have) witness += ", x=" + vec_str(x);
      }
      return false;
    }
  }
  return true;
}

// dyadic enclosure of a positive power product, [lo, hi] with lo <= v <= hi
std::pair<Rat, Rat> pp_enclose(const PowerProduct& v, int bits) {
  auto lr = v.log2_range(64);
  Rat lo = rat_pow(Rat(2), to_long(rat_floor(lr.first), "enclosure exponent"));
  Rat hi = rat_pow(Rat(2), to_long(rat_ceil(lr.second), "enclosure exponent"));
  for (int i = 0; i < bits; ++i) {
    Rat mid = (lo + hi) / 2;
    if (v.cmp(mid) >= 0) lo = mid;
    else hi = mid;
  }
  return {lo, hi};
}

// sign of rho^{-eta} - (rho^{-e/2} + c), conservatively 0 when the dyadic
// enclosures cannot separate the sides
int eta_margin(const ParameterSchedule& s, const Rat& eta, const Rat& c) {
  PowerProduct y = pp_pow(Rat(s.rho), -eta);
  PowerProduct a = pp_pow(Rat(s.rho), -s.eps_L7 / 2);
  for (int bits : {32, 64, 128, 256}) {
    auto ye = pp_enclose(y, bits);
    auto ae = pp_enclose(a, bits);
    if (ye.first >= ae.second + c) return 1;
    if (ye.second < ae.first + c) return -1;
  }
  return 0;
}

// largest dyadic eta = m/2^24 with rho^{-e/2} + 2^d/floor(rho_1) <= rho^{-eta}
std::optional<Rat> find_eta(const ParameterSchedule& s) {
  Rat f1 = Rat(rat_floor(rat_power(s.R, Rat(1) + s.aux.wtilde[0], "rho_1")));
  Rat c = Rat(Int(1) << s.d) / f1;
  if (c >= 1) return std::nullopt;
  const long denom = 1L << 24;
  if (eta_margin(s, frac(Int(1), Int(denom)), c) != 1) return std::nullopt;
  long lo = 1, hi = denom;  // feasible at lo; search the last feasible point
  while (lo + 1 < hi) {
    long mid = lo + (hi - lo) / 2;
    if (eta_margin(s, frac(Int(mid), Int(denom)), c) == 1) lo = mid;
    else hi = mid;
  }
  return frac(Int(lo), Int(denom));
}

}  // namespace

const char* case_name(CaseTag t) {
  switch (t) {
    case CaseTag::root: return "root";
    case CaseTag::case1: return "case1";
    case CaseTag::case2: return "case2";
    case CaseTag::case3: return "case3";
    case CaseTag::case4: return "case4";
  }
  return "?";
}

long schedule_horizon(const ParameterSchedule& s) {
  if (s.levels.empty()) throw ConfigError("schedule has no stages");
  long xi = to_long(s.xi, "xi");
  return xi * stage_of(s, static_cast<int>(s.levels.size())).nd();
}

Regime level_regime(const ParameterSchedule& s, long l) {
  if (l < 1) throw ConfigError("level_regime expects a level >= 1");
  long xi = to_long(s.xi, "xi");
  for (std::size_t k = 1; k <= s.levels.size(); ++k) {
    Stage st = stage_of(s, static_cast<int>(k));
    if (l <= st.n) return {CaseTag::case1, static_cast<int>(k) - 1};
    if (l <= st.nd()) return {CaseTag::case2, static_cast<int>(k)};
    if (l == st.nd() + 1) return {CaseTag::case3, static_cast<int>(k)};
    if (l <= xi * st.nd()) return {CaseTag::case4, static_cast<int>(k)};
  }
  throw ConfigError("level " + std::to_string(l) + " is beyond the schedule horizon " +
                    std::to_string(schedule_horizon(s)));
}

std::vector<CantorNode> init_level0(const ParameterSchedule& s) {
  Box unit;
  unit.lo.assign(s.d, Rat(0));
  unit.hi.assign(s.d, Rat(1));
  Vec side(s.d);
  for (std::size_t i = 0; i < s.d; ++i) side[i] = pp_rat(s.rho0[i], "rho0");
  auto m = full_counts(unit, side);
  std::vector<CantorNode> out;
  for_each_cell(m, [&](const std::vector<long>& idx) {
    CantorNode nd;
    nd.level = 0;
    nd.box = grid_cell(unit, side, idx);
    nd.tag = CaseTag::root;
    nd.grid_idx = idx;
    out.push_back(std::move(nd));
  });
  if (out.empty()) throw ConfigError("level-0 grid is empty");
  Rat share = frac(Int(1), Int(static_cast<long>(out.size())));
  for (auto& nd : out) nd.mu = share;
  return out;
}

bool count_meets_threshold(const Int& count, const Int& base, const Rat& expo) {
  if (sgn(expo) < 0) throw ConfigError("threshold exponent must be nonnegative");
  if (sgn(count) < 0) return false;
  unsigned long p = to_ulong(Int(expo.get_num()), "threshold exponent");
  unsigned long q = to_ulong(Int(expo.get_den()), "threshold exponent");
  Int lhs, rhs;
  mpz_pow_ui(lhs.get_mpz_t(), count.get_mpz_t(), q);
  mpz_pow_ui(rhs.get_mpz_t(), base.get_mpz_t(), p);
  return lhs >= rhs;
}

RefineResult refine_case1(const ParameterSchedule& s, const CantorNode& E, long l, int k,
                          bool skip_plane, Budget& budget) {
  RefineResult out;
  Vec side(s.d);
  for (std::size_t i = 0; i < s.d; ++i) side[i] = tail_side(s, i, l);
  auto m = full_counts(E.box, side);
  BandSweep sweep;
  if (!skip_plane) sweep = make_band_sweep(s, E.box, l, budget);
  if (sweep.fallback) {
    out.fallback = true;
    out.notes.push_back("zone sweep found no spanning plane; removal fell back to per-point zones");
  }
  for_each_cell(m, [&](const std::vector<long>& idx) {
    Box cell = grid_cell(E.box, side, idx);
    if (!skip_plane && sweep.removes(cell, budget)) {
      ++out.removed_plane;
      return;
    }
    CantorNode child;
    child.level = l;
    child.box = std::move(cell);
    child.tag = CaseTag::case1;
    child.k = k;
    child.grid_idx = idx;
    out.children.push_back(std::move(child));
  });
  return out;
}

RefineResult refine_case2(const ParameterSchedule& s, const CantorNode& E, long l, int k,
                          Budget& budget) {
  RefineResult out;
  Stage st = stage_of(s, k);
  Approximation ap;
  if (l == st.n + 1) {
    const auto& lp = s.levels[static_cast<std::size_t>(k - 1)];
    Rat eps_prev = pp_rat(s.eps_before(static_cast<std::size_t>(k)), "stage epsilon");
    Rat M = rat_pow(s.R, st.n);
    Rat beta = Rat(1) / eps_prev + 1;
    Vec z = E.box.center();
    RationalVector pq = intermediate_approximation(z, M, beta, s.aux.wtilde, eps_prev, budget);
    if (Rat(pq.q) < M)
      throw PreconditionViolation("distinguished denominator fell below the band floor");
    // the search window allows q up to beta*M, one notch past the stated
    // ceiling eps^{-1} M; a landing in that notch is surfaced, not fatal
    if (Rat(pq.q) * eps_prev > M)
      out.notes.push_back("distinguished denominator q=" + pq.q.get_str() +
                          " exceeds the band ceiling");
    ap.p = pq.p;
    ap.q = pq.q;
    ap.c = lp.c;
    ap.y.resize(s.d);
    for (std::size_t i = 0; i < s.d; ++i) {
      Rat anchor = Rat(pq.p[i]) / Rat(pq.q);
      if (rat_abs(z[i] - anchor) > tail_side(s, i, st.n) / 4)
        out.notes.push_back("approximation offset exceeds a quarter cell on axis " +
                            std::to_string(i + 1));
      Rat offset =
          ap.c * rat_power(Rat(pq.q), -(Rat(1) + s.tau * s.w.w[i]), "placement offset");
      Rat plus = anchor + offset;
      Rat minus = anchor - offset;
      if (plus >= E.box.lo[i] && plus < E.box.hi[i]) ap.y[i] = plus;
      else if (minus >= E.box.lo[i] && minus < E.box.hi[i]) ap.y[i] = minus;
      else
        throw PreconditionViolation("no admissible placement on axis " + std::to_string(i + 1) +
                                    " of " + box_str(E.box));
    }
  } else {
    if (!E.approx) throw ConfigError("tail refinement without a stored approximation");
    ap = *E.approx;
  }
  // grid cell of E containing y, anchored at the lower corner; y in a
  // remainder strip flushes the cell against the upper face instead
  Vec side(s.d);
  std::vector<long> idx(s.d);
  for (std::size_t i = 0; i < s.d; ++i) {
    side[i] = tail_side(s, i, std::min(l, st.n_i[i]));
    long mfull = to_long(rat_floor(E.box.side(i) / side[i]), "cells per axis");
    long j = to_long(rat_floor((ap.y[i] - E.box.lo[i]) / side[i]), "cell index");
    idx[i] = (j >= mfull) ? -1 : j;
  }
  CantorNode child;
  child.level = l;
  child.box = grid_cell(E.box, side, idx);
  child.tag = CaseTag::case2;
  child.k = k;
  child.grid_idx = idx;
  child.approx = std::move(ap);
  if (!child.box.contains_point(child.approx->y))
    throw PreconditionViolation("distinguished point escaped its grid cell at level " +
                                std::to_string(l));
  out.children.push_back(std::move(child));
  return out;
}

DangerRegion build_danger_region(const ParameterSchedule& s, const Box& E, int k,
                                 Budget& budget) {
  DangerRegion dr;
  dr.k = k;
  Stage st = stage_of(s, k);
  long nd = st.nd();
  long horizon = to_long(s.xi, "xi") * nd;

  // fine grid at the horizon resolution: the first post-stage grid refined
  // level by level, remainders dropped at every step
  std::vector<Box> fine;
  {
    Vec side(s.d);
    for (std::size_t i = 0; i < s.d; ++i) side[i] = tail_side(s, i, nd + 1);
    auto m = full_counts(E, side);
    for_each_cell(m, [&](const std::vector<long>& idx) { fine.push_back(grid_cell(E, side, idx)); });
    for (long n = nd + 2; n <= horizon; ++n) {
      Vec sub(s.d);
      for (std::size_t i = 0; i < s.d; ++i) sub[i] = tail_side(s, i, n);
      std::vector<Box> next;
      for (const auto& parent : fine) {
        auto mm = full_counts(parent, sub);
        for_each_cell(mm,
                      [&](const std::vector<long>& idx) { next.push_back(grid_cell(parent, sub, idx)); });
      }
      fine = std::move(next);
      budget.charge(fine.size());
    }
  }
  std::vector<char> marked(fine.size(), 0);

  Rat eps_zone = rat_power(s.R, -Rat(st.n) * (s.tau - 1), "mid-stage zone scale");
  std::size_t fallback_cells = 0;
  for (long n = st.n_i.front(); n <= nd + 1; ++n) {
    Vec side(s.d);
    for (std::size_t i = 0; i < s.d; ++i) side[i] = tail_side(s, i, std::max(n, st.n_i[i]));
    auto sub = subdivide(E, side, 0, &budget);
    std::vector<Box> cells = std::move(sub.full);
    cells.insert(cells.end(), sub.remainder.begin(), sub.remainder.end());
    for (const auto& cell : cells) {
      auto cert = simplex_certificate(cell, n, s.R, s.w.w, eps_zone, budget);
      if (cert.points.empty()) continue;
      if (cert.plane) {
        Vec padded(s.d);
        for (std::size_t i = 0; i < s.d; ++i)
          padded[i] = rat_power(s.R, -(Rat(1) + s.tau * s.w.w[i]) * Rat(n), "zone radius");
        for (std::size_t ji = 0; ji < fine.size(); ++ji) {
          if (marked[ji]) continue;
          Vec clo, chi;
          if (!closed_overlap(fine[ji], cell, clo, chi)) continue;
          budget.charge();
          Vec c(s.d), r(s.d);
          for (std::size_t i = 0; i < s.d; ++i) {
            c[i] = (clo[i] + chi[i]) / 2;
            r[i] = (chi[i] - clo[i]) / 2 + padded[i];
          }
          if (plane_meets_box(*cert.plane, c, r)) marked[ji] = 1;
        }
      } else {
        ++fallback_cells;
        for (std::size_t ji = 0; ji < fine.size(); ++ji) {
          if (marked[ji]) continue;
          Vec clo, chi;
          if (!closed_overlap(fine[ji], cell, clo, chi)) continue;
          for (const auto& pt : cert.points) {
            budget.charge();
            bool all = true;
            for (std::size_t i = 0; i < s.d && all; ++i) {
              std::vector<PowFactor> t{{Rat(pt.q), -s.tau * s.w.w[i]}};
              all = axis_meets_closed(pt.q, pt.p[i], clo[i], chi[i], t);
            }
            if (all) {
              marked[ji] = 1;
              break;
            }
          }
        }
      }
    }
  }
  if (fallback_cells > 0)
    dr.notes.push_back("mid-stage sweep: " + std::to_string(fallback_cells) +
                       " cell(s) had no spanning plane; fell back to per-point zones");
  for (std::size_t ji = 0; ji < fine.size(); ++ji)
    if (marked[ji]) dr.boxes.push_back(fine[ji]);
  return dr;
}

RefineResult refine_case3(const ParameterSchedule& s, const CantorNode& E, int k,
                          const DangerRegion& danger, bool skip_danger, Budget& budget) {
  RefineResult out;
  Stage st = stage_of(s, k);
  long nd = st.nd();
  long horizon = to_long(s.xi, "xi") * nd;
  Rat expo = Rat(horizon - nd - 1) * (Rat(1) - s.eps_L7 / 2);
  Vec side(s.d);
  for (std::size_t i = 0; i < s.d; ++i) side[i] = tail_side(s, i, nd + 1);
  auto m = full_counts(E.box, side);
  for_each_cell(m, [&](const std::vector<long>& idx) {
    Box cell = grid_cell(E.box, side, idx);
    budget.charge();
    if (!skip_danger) {
      Int cnt(0);
      for (const auto& jb : danger.boxes)
        if (cell.contains_box(jb)) ++cnt;
      if (count_meets_threshold(cnt, s.rho, expo)) {
        ++out.removed_danger;
        return;
      }
    }
    CantorNode child;
    child.level = nd + 1;
    child.box = std::move(cell);
    child.tag = CaseTag::case3;
    child.k = k;
    child.grid_idx = idx;
    out.children.push_back(std::move(child));
  });
  return out;
}

RefineResult refine_case4(const ParameterSchedule& s, const CantorNode& E, long l, int k,
                          const DangerRegion& danger, bool skip_plane, bool skip_danger,
                          Budget& budget) {
  RefineResult out;
  Stage st = stage_of(s, k);
  long nd = st.nd();
  long horizon = to_long(s.xi, "xi") * nd;
  Rat expo = Rat(horizon - l) * (Rat(1) - s.eps_L7 / 2);
  Vec side(s.d);
  for (std::size_t i = 0; i < s.d; ++i) side[i] = tail_side(s, i, l);
  auto m = full_counts(E.box, side);
  BandSweep sweep;
  if (!skip_plane) sweep = make_band_sweep(s, E.box, l, budget);
  if (sweep.fallback) {
    out.fallback = true;
    out.notes.push_back("zone sweep found no spanning plane; removal fell back to per-point zones");
  }
  for_each_cell(m, [&](const std::vector<long>& idx) {
    Box cell = grid_cell(E.box, side, idx);
    if (!skip_plane && sweep.removes(cell, budget)) {
      ++out.removed_plane;
      return;
    }
    if (!skip_danger) {
      Int cnt(0);
      for (const auto& jb : danger.boxes)
        if (cell.contains_box(jb)) ++cnt;
      if (count_meets_threshold(cnt, s.rho, expo)) {
        ++out.removed_danger;
        return;
      }
    }
    CantorNode child;
    child.level = l;
    child.box = std::move(cell);
    child.tag = CaseTag::case4;
    child.k = k;
    child.grid_idx = idx;
    out.children.push_back(std::move(child));
  });
  if (l == horizon) {
    // at the horizon the grids coincide, so survivors must be clear of every
    // danger-marked cell
    bool noted = false;
    for (const auto& child : out.children) {
      for (const auto& jb : danger.boxes) {
        budget.charge();
        if (!child.box.intersects_open(jb)) continue;
        if (skip_danger) {
          if (!noted)
            out.notes.push_back(
                "survivor meets a danger-marked cell at the stage horizon (removal skipped)");
          noted = true;
          break;
        }
        throw PreconditionViolation("stage horizon: surviving cell " + box_str(child.box) +
                                    " meets danger-marked cell " + box_str(jb));
      }
    }
  }
  return out;
}

CantorTree build_tree(const ParameterSchedule& s, const BuildOptions& opt) {
  if (s.mode != Mode::toy)
    throw ConfigError(
        "faithful stage depths are astronomically large; materialize a toy schedule instead");
  if (opt.depth < 0) throw ConfigError("depth must be >= 0");
  long horizon = schedule_horizon(s);
  if (opt.depth > horizon)
    throw ConfigError("depth " + std::to_string(opt.depth) + " exceeds the schedule horizon " +
                      std::to_string(horizon));

  CantorTree t;
  t.sched = s;
  t.schedule_report = schedule::verify_schedule(s);
  t.options = opt;
  Budget local;
  Budget& b = opt.budget ? *opt.budget : local;

  t.levels.push_back(init_level0(s));
  t.raw_child_counts.push_back({});
  {
    LevelSummary sum;
    sum.level = 0;
    sum.tag = CaseTag::root;
    sum.boxes = t.levels[0].size();
    sum.mu_min = sum.mu_max = t.levels[0][0].mu;
    t.summary.push_back(std::move(sum));
  }

  for (long l = 1; l <= opt.depth; ++l) {
    Regime rg = level_regime(s, l);
    bool skip_plane = opt.sabotage == Sabotage::skip_plane_removal_at_level &&
                      opt.sabotage_level == static_cast<std::size_t>(l);
    bool skip_danger = opt.sabotage == Sabotage::skip_danger_removal;

    if (rg.tag == CaseTag::case3) {
      DangerRegion dr;
      dr.k = rg.k;
      std::map<std::string, std::size_t> notes;
      for (const auto& parent : t.levels.back()) {
        DangerRegion part = build_danger_region(s, parent.box, rg.k, b);
        for (auto& bx : part.boxes) dr.boxes.push_back(std::move(bx));
        for (auto& nt : part.notes) ++notes[nt];
      }
      for (const auto& [nt, cnt] : notes) {
        dr.notes.push_back(nt + " [" + std::to_string(cnt) + " node(s)]");
        t.anomalies.push_back("stage " + std::to_string(rg.k) + ": " + nt + " [" +
                              std::to_string(cnt) + " node(s)]");
      }
      t.danger.push_back(std::move(dr));
    }
    const DangerRegion* dreg = nullptr;
    if (rg.tag == CaseTag::case3 || rg.tag == CaseTag::case4) {
      for (const auto& d : t.danger)
        if (d.k == rg.k) dreg = &d;
      if (!dreg) throw ConfigError("danger region for stage " + std::to_string(rg.k) +
                                   " was never built");
    }

    const auto& prev = t.levels.back();
    std::vector<std::vector<CantorNode>> per_parent(prev.size());
    std::vector<std::size_t> raw(prev.size(), 0);
    LevelSummary sum;
    sum.level = static_cast<std::size_t>(l);
    sum.tag = rg.tag;
    std::map<std::string, std::size_t> level_notes;
    for (std::size_t pi = 0; pi < prev.size(); ++pi) {
      RefineResult rr;
      switch (rg.tag) {
        case CaseTag::case1: rr = refine_case1(s, prev[pi], l, rg.k, skip_plane, b); break;
        case CaseTag::case2: rr = refine_case2(s, prev[pi], l, rg.k, b); break;
        case CaseTag::case3: rr = refine_case3(s, prev[pi], rg.k, *dreg, skip_danger, b); break;
        case CaseTag::case4:
          rr = refine_case4(s, prev[pi], l, rg.k, *dreg, skip_plane, skip_danger, b);
          break;
        default: throw ConfigError("refinement reached an unexpected regime");
      }
      if (rr.children.empty())
        throw PreconditionViolation("level " + std::to_string(l) + ": node #" +
                                    std::to_string(pi) + " lost every child (" +
                                    case_name(rg.tag) + ")");
      sum.removed_plane += rr.removed_plane;
      sum.removed_danger += rr.removed_danger;
      if (rr.fallback) ++sum.fallback_nodes;
      for (const auto& nt : rr.notes) ++level_notes[nt];
      raw[pi] = rr.children.size();
      per_parent[pi] = std::move(rr.children);
    }
    if (opt.uniform_branching) {
      std::size_t mmin = per_parent[0].size();
      for (const auto& v : per_parent) mmin = std::min(mmin, v.size());
      for (auto& v : per_parent) v.resize(mmin);
    }
    std::vector<CantorNode> lvl;
    for (std::size_t pi = 0; pi < per_parent.size(); ++pi) {
      Rat share = prev[pi].mu / Rat(static_cast<long>(per_parent[pi].size()));
      for (auto& ch : per_parent[pi]) {
        ch.parent = pi;
        ch.mu = share;
        lvl.push_back(std::move(ch));
      }
    }
    sum.boxes = lvl.size();
    sum.mu_min = sum.mu_max = lvl[0].mu;
    for (const auto& nd : lvl) {
      if (nd.mu < sum.mu_min) sum.mu_min = nd.mu;
      if (nd.mu > sum.mu_max) sum.mu_max = nd.mu;
    }
    for (const auto& [nt, cnt] : level_notes)
      t.anomalies.push_back("level " + std::to_string(l) + ": " + nt + " [" +
                            std::to_string(cnt) + " node(s)]");
    t.levels.push_back(std::move(lvl));
    t.raw_child_counts.push_back(std::move(raw));
    t.summary.push_back(std::move(sum));
  }
  return t;
}

const VerifyRow* VerdictReport::find(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return &r;
  return nullptr;
}

bool VerdictReport::ok(const std::string& name) const {
  const VerifyRow* r = find(name);
  return r != nullptr && r->pass;
}

VerdictReport verify_structure(const CantorTree& t) {
  VerdictReport rep;
  const auto& s = t.sched;
  Box unit;
  unit.lo.assign(s.d, Rat(0));
  unit.hi.assign(s.d, Rat(1));
  for (long l = 0; l <= t.depth(); ++l) {
    const auto& lvl = t.levels[static_cast<std::size_t>(l)];
    Vec side = level_sides(s, l);
    Regime rg = (l == 0) ? Regime{CaseTag::root, 0} : level_regime(s, l);
    std::string tag = " level=" + std::to_string(l);

    {
      bool pass = true;
      std::string wit;
      for (std::size_t ni = 0; ni < lvl.size() && pass; ++ni)
        for (std::size_t i = 0; i < s.d && pass; ++i)
          if (lvl[ni].box.side(i) != side[i]) {
            pass = false;
            wit = "node #" + std::to_string(ni) + " axis " + std::to_string(i + 1) +
                  ": side " + rat_str(lvl[ni].box.side(i)) + " != " + rat_str(side[i]);
          }
      std::string nm = (l == 0) ? "sides level=0"
                                : (rg.tag == CaseTag::case2 ? std::string("D2") : std::string("D1")) +
                                      tag;
      add_row(rep, nm, pass, false, wit);
    }
    {
      bool pass = true;
      std::string wit;
      for (std::size_t ni = 0; ni < lvl.size() && pass; ++ni) {
        const auto& nd = lvl[ni];
        if (nd.tag != rg.tag || nd.k != rg.k || nd.level != l) {
          pass = false;
          wit = "node #" + std::to_string(ni) + " tagged " + case_name(nd.tag) + " k=" +
                std::to_string(nd.k);
        }
      }
      add_row(rep, "tags" + tag, pass, false, wit);
    }
    {
      bool pass = true;
      std::string wit;
      const std::vector<CantorNode>* prev =
          (l == 0) ? nullptr : &t.levels[static_cast<std::size_t>(l - 1)];
      for (std::size_t ni = 0; ni < lvl.size() && pass; ++ni) {
        const auto& nd = lvl[ni];
        const Box& pbox = prev ? (*prev)[nd.parent].box : unit;
        if (prev && nd.parent >= prev->size()) {
          pass = false;
          wit = "node #" + std::to_string(ni) + " has no parent";
          break;
        }
        if (!pbox.contains_box(nd.box)) {
          pass = false;
          wit = "node #" + std::to_string(ni) + " escapes its parent";
          break;
        }
        Box cell = grid_cell(pbox, side, nd.grid_idx);
        if (cell.lo != nd.box.lo || cell.hi != nd.box.hi) {
          pass = false;
          wit = "node #" + std::to_string(ni) + " does not match its grid index";
        }
      }
      add_row(rep, "nesting" + tag, pass, false, wit);
    }
    {
      // pairwise disjointness; equal sides make overlap a per-axis offset test
      bool pass = true;
      std::string wit;
      std::vector<std::size_t> ord(lvl.size());
      std::iota(ord.begin(), ord.end(), std::size_t{0});
      std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t bI) {
        return lvl[a].box.lo < lvl[bI].box.lo;
      });
      for (std::size_t a = 0; a < ord.size() && pass; ++a) {
        for (std::size_t bI = a + 1; bI < ord.size(); ++bI) {
          const Box& A = lvl[ord[a]].box;
          const Box& B = lvl[ord[bI]].box;
          if (B.lo[0] - A.lo[0] >= side[0]) break;
          bool overlap = true;
          for (std::size_t i = 0; i < s.d && overlap; ++i)
            overlap = rat_abs(A.lo[i] - B.lo[i]) < side[i];
          if (overlap) {
            pass = false;
            wit = "nodes #" + std::to_string(ord[a]) + " and #" + std::to_string(ord[bI]) +
                  " overlap";
            break;
          }
        }
      }
      add_row(rep, "disjoint" + tag, pass, false, wit);
    }
    {
      bool pass = true;
      std::string wit;
      Rat total(0);
      for (const auto& nd : lvl) total += nd.mu;
      if (total != 1) {
        pass = false;
        wit = "masses sum to " + rat_str(total);
      }
      if (pass && l > 0) {
        const auto& prev = t.levels[static_cast<std::size_t>(l - 1)];
        std::vector<std::size_t> counts(prev.size(), 0);
        for (const auto& nd : lvl) ++counts[nd.parent];
        for (std::size_t ni = 0; ni < lvl.size() && pass; ++ni) {
          const auto& nd = lvl[ni];
          if (nd.mu * Rat(static_cast<long>(counts[nd.parent])) != prev[nd.parent].mu) {
            pass = false;
            wit = "node #" + std::to_string(ni) + " mass is not its parent's equal share";
          }
        }
      }
      add_row(rep, "mu" + tag, pass, false, wit);
    }
    if (rg.tag == CaseTag::case2) {
      bool pass = true;
      std::string wit;
      for (std::size_t ni = 0; ni < lvl.size() && pass; ++ni) {
        const auto& nd = lvl[ni];
        if (!nd.approx) {
          pass = false;
          wit = "node #" + std::to_string(ni) + " lacks an approximation record";
          break;
        }
        const auto& ap = *nd.approx;
        if (!nd.box.contains_point(ap.y)) {
          pass = false;
          wit = "node #" + std::to_string(ni) + " does not contain its distinguished point";
          break;
        }
        for (std::size_t i = 0; i < s.d && pass; ++i) {
          Rat expect =
              ap.c * rat_power(Rat(ap.q), -(Rat(1) + s.tau * s.w.w[i]), "placement offset");
          if (rat_abs(ap.y[i] - Rat(ap.p[i]) / Rat(ap.q)) != expect) {
            pass = false;
            wit = "node #" + std::to_string(ni) + " axis " + std::to_string(i + 1) +
                  ": placement offset is off";
          }
        }
      }
      add_row(rep, "approx" + tag, pass, false, wit);
    }
  }
  return rep;
}

VerdictReport verify_pointwise(const CantorTree& t, long level, int samples_per_box) {
  VerdictReport rep;
  const auto& s = t.sched;
  const auto& gates = t.schedule_report;
  Budget b;
  long L = std::min(level, t.depth());

  // tail-band clearance, one row per level past the stage floor
  for (long l = 2; l <= L; ++l) {
    Regime rg = level_regime(s, l);
    if (rg.tag != CaseTag::case1 && rg.tag != CaseTag::case4) continue;
    long ndk = (rg.k == 0) ? 0 : stage_of(s, rg.k).nd();
    if (l <= ndk + 1) continue;
    Rat eps0 = pp_rat(s.eps0, "eps0");
    auto [s_lo, s_hi] = band_range(s.R, l - 1, l);
    bool pass = true;
    std::string wit;
    const auto& lvl = t.levels[static_cast<std::size_t>(l)];
    for (std::size_t ni = 0; ni < lvl.size() && pass; ++ni) {
      std::string w;
      if (!box_band_clear(
              s, lvl[ni].box, s_lo, s_hi,
              [&](const Int& sv, std::size_t i) {
                return std::vector<PowFactor>{{eps0 / Rat(sv), s.aux.wtilde[i]}};
              },
              nullptr, b, samples_per_box, w)) {
        pass = false;
        wit = "node #" + std::to_string(ni) + ": " + w;
      }
    }
    if (pass) wit = "band s in [" + s_lo.get_str() + ", " + s_hi.get_str() + "]";
    add_row(rep, "P2 level=" + std::to_string(l), pass, false, wit);
  }

  for (int k = 1; static_cast<std::size_t>(k) <= s.levels.size(); ++k) {
    Stage st = stage_of(s, k);
    std::string kk = " k=" + std::to_string(k);
    if (st.nd() > L) break;
    const auto& floor_lvl = t.levels[static_cast<std::size_t>(st.nd())];
    Rat eps_prev = pp_rat(s.eps_before(static_cast<std::size_t>(k)), "stage epsilon");
    Rat M = rat_pow(s.R, st.n);

    {
      bool pass = true;
      std::string wit;
      for (std::size_t ni = 0; ni < floor_lvl.size() && pass; ++ni) {
        const auto& nd = floor_lvl[ni];
        if (!nd.approx) {
          pass = false;
          wit = "node #" + std::to_string(ni) + " lacks an approximation record";
          break;
        }
        if (Rat(nd.approx->q) < M || Rat(nd.approx->q) * eps_prev > M) {
          pass = false;
          wit = "node #" + std::to_string(ni) + ": q=" + nd.approx->q.get_str() +
                " outside [" + rat_str(M) + ", " + rat_str(M / eps_prev) + "]";
        }
      }
      add_row(rep, "eq:p11" + kk, pass, false, wit);
    }
    {
      bool gated = true;
      for (std::size_t i = 1; i <= s.d; ++i)
        gated = gated && gates.ok("eq:ckcond k=" + std::to_string(k) + " i=" + std::to_string(i));
      bool pass = true;
      std::string wit;
      for (std::size_t ni = 0; ni < floor_lvl.size() && pass; ++ni) {
        const auto& nd = floor_lvl[ni];
        if (!nd.approx) continue;  // already reported by eq:p11
        const auto& ap = *nd.approx;
        Rat twoc = 2 * ap.c - 1;
        for (std::size_t i = 0; i < s.d && pass; ++i) {
          std::vector<PowFactor> tq{{Rat(ap.q), -s.tau * s.w.w[i]}};
          // strict upper bracket over the whole box; the upper face is only
          // approached so equality there is allowed
          if (!pow_gt(tq, rat_abs(Rat(ap.q) * nd.box.lo[i] - Rat(ap.p[i]))) ||
              !pow_ge(tq, Rat(ap.q) * nd.box.hi[i] - Rat(ap.p[i]))) {
            pass = false;
            wit = "node #" + std::to_string(ni) + ": upper bracket fails on axis " +
                  std::to_string(i + 1);
          }
        }
        if (!pass) break;
        bool meets_all = true;
        for (std::size_t i = 0; i < s.d && meets_all; ++i) {
          std::vector<PowFactor> tS{{twoc, s.w.w[i] / s.w.w[0]}, {Rat(ap.q), -s.tau * s.w.w[i]}};
          meets_all = axis_meets_open(ap.q, ap.p[i], nd.box.lo[i], nd.box.hi[i], tS);
        }
        if (meets_all) {
          pass = false;
          wit = "node #" + std::to_string(ni) +
                ": some point falls inside the lower bracket around p/q";
        }
      }
      add_row(rep, "eq:p12" + kk, pass, !gated, wit);
    }
    {
      bool gated = gates.ok("eq:wave k=" + std::to_string(k));
      auto [s_lo, s_hi] = band_range(s.R, st.n, st.n_i.front());
      bool pass = true;
      std::string wit;
      for (std::size_t ni = 0; ni < floor_lvl.size() && pass; ++ni) {
        const auto& nd = floor_lvl[ni];
        if (!nd.approx) continue;
        std::string w;
        if (!box_band_clear(
                s, nd.box, s_lo, s_hi,
                [&](const Int& sv, std::size_t i) {
                  return std::vector<PowFactor>{{Rat(sv), -s.tau * s.w.w[i]}};
                },
                &*nd.approx, b, samples_per_box, w)) {
          pass = false;
          wit = "node #" + std::to_string(ni) + ": " + w;
        }
      }
      if (pass) wit = "band s in [" + s_lo.get_str() + ", " + s_hi.get_str() + "]";
      add_row(rep, "uniqueness" + kk, pass, !gated, wit);
    }

    long horizon = to_long(s.xi, "xi") * st.nd();
    if (horizon <= L) {
      auto [s_lo, s_hi] = band_range(s.R, st.n_i.front(), st.nd() + 1);
      bool pass = true;
      std::string wit;
      const auto& lvl = t.levels[static_cast<std::size_t>(horizon)];
      for (std::size_t ni = 0; ni < lvl.size() && pass; ++ni) {
        std::string w;
        if (!box_band_clear(
                s, lvl[ni].box, s_lo, s_hi,
                [&](const Int& sv, std::size_t i) {
                  return std::vector<PowFactor>{{Rat(sv), -s.tau * s.w.w[i]}};
                },
                nullptr, b, samples_per_box, w)) {
          pass = false;
          wit = "node #" + std::to_string(ni) + ": " + w;
        }
      }
      if (pass) wit = "band s in [" + s_lo.get_str() + ", " + s_hi.get_str() + "]";
      add_row(rep, "P3" + kk, pass, false, wit);
    }
  }

  // stage-transition clearance: by the time level n_{k+1} is built, every
  // denominator of the finished bands must clear the stage-k scale
  for (int k = 0; static_cast<std::size_t>(k) < s.levels.size(); ++k) {
    long n_next = stage_of(s, k + 1).n;
    if (n_next > L || n_next < 1) continue;
    long n_cur = (k == 0) ? 0 : stage_of(s, k).n;
    Rat eps_k = pp_rat(s.eps_before(static_cast<std::size_t>(k + 1)), "stage epsilon");
    auto [s_lo, s_hi] = band_range(s.R, n_cur, n_next);
    bool pass = true;
    std::string wit;
    const auto& lvl = t.levels[static_cast<std::size_t>(n_next)];
    for (std::size_t ni = 0; ni < lvl.size() && pass; ++ni) {
      std::string w;
      if (!box_band_clear(
              s, lvl[ni].box, s_lo, s_hi,
              [&](const Int& sv, std::size_t i) {
                return std::vector<PowFactor>{{eps_k / Rat(sv), s.aux.wtilde[i]}};
              },
              nullptr, b, samples_per_box, w)) {
        pass = false;
        wit = "node #" + std::to_string(ni) + ": " + w;
      }
    }
    if (pass) wit = "band s in [" + s_lo.get_str() + ", " + s_hi.get_str() + "]";
    add_row(rep, "lemma8 k=" + std::to_string(k), pass, false, wit);
  }
  return rep;
}

VerdictReport verify_counts(const CantorTree& t, const std::vector<Box>& trial_boxes) {
  VerdictReport rep;
  const auto& s = t.sched;
  const auto& gates = t.schedule_report;
  long L = t.depth();
  Int f1 = rat_floor(rat_power(s.R, Rat(1) + s.aux.wtilde[0], "rho_1"));
  Int two_d = Int(1) << s.d;

  std::optional<Rat> eta = s.eta;
  bool eta_ok = false;
  {
    std::string wit;
    Rat c = Rat(two_d) / Rat(f1);
    if (eta) {
      int m = eta_margin(s, *eta, c);
      eta_ok = m == 1;
      wit = "eta=" + rat_str(*eta) + (m == 0 ? " (enclosure unresolved)" : "");
    } else {
      eta = find_eta(s);
      eta_ok = eta.has_value();
      wit = eta ? "eta=" + rat_str(*eta) + " by dyadic bisection" : "no admissible eta";
      if (!eta_ok) eta.reset();
    }
    add_row(rep, "eta admissible", eta_ok, !eta_ok, wit);
  }

  bool g_item1 = gates.ok("eps0 formula") && gates.ok("rho0 formula");
  for (long l = 1; l <= L; ++l) {
    Regime rg = level_regime(s, l);
    const auto& raw = t.raw_child_counts[static_cast<std::size_t>(l)];
    const auto& sum = t.summary[static_cast<std::size_t>(l)];
    std::string tag = " level=" + std::to_string(l);
    std::string kk = "k=" + std::to_string(rg.k);
    if (rg.tag == CaseTag::case1) {
      bool gated = g_item1 && sum.fallback_nodes == 0;
      bool pass = true;
      std::string wit;
      // child count at least rho (1 - 2^d / floor(rho_1)), cleared by f1
      for (std::size_t pi = 0; pi < raw.size() && pass; ++pi)
        if (Int(static_cast<long>(raw[pi])) * f1 < s.rho * (f1 - two_d)) {
          pass = false;
          wit = "node #" + std::to_string(pi) + " kept " + std::to_string(raw[pi]);
        }
      add_row(rep, "prop13 item (1)" + tag, pass, !gated, wit);
    } else if (rg.tag == CaseTag::case2) {
      bool pass = true;
      std::string wit;
      for (std::size_t pi = 0; pi < raw.size() && pass; ++pi)
        if (raw[pi] != 1) {
          pass = false;
          wit = "node #" + std::to_string(pi) + " kept " + std::to_string(raw[pi]);
        }
      add_row(rep, "prop13 item (2)" + tag, pass, false, wit);
    } else if (rg.tag == CaseTag::case3) {
      Stage st = stage_of(s, rg.k);
      bool gated = gates.ok("lemma6 " + kk) && gates.ok("lemma7i " + kk) &&
                   gates.ok("lemma7ii " + kk);
      Int prod(1);
      for (std::size_t i = 0; i < s.d; ++i)
        prod *= rat_floor(
            rat_power(s.R, (Rat(1) + s.aux.wtilde[i]) * Rat(st.nd() + 1 - st.n_i[i]), "item 3"));
      bool pass = true;
      std::string wit;
      for (std::size_t pi = 0; pi < raw.size() && pass; ++pi)
        if (Int(2 * static_cast<long>(raw[pi])) < prod) {
          pass = false;
          wit = "node #" + std::to_string(pi) + " kept " + std::to_string(raw[pi]) +
                " of the " + prod.get_str() + "/2 required";
        }
      add_row(rep, "prop13 item (3)" + tag, pass, !gated, wit);
    } else if (rg.tag == CaseTag::case4) {
      bool gated = g_item1 && gates.ok("lemma7ii " + kk) && sum.fallback_nodes == 0;
      bool pass = true;
      std::string wit;
      for (std::size_t pi = 0; pi < raw.size() && pass; ++pi) {
        Rat deficit = Rat(s.rho) - Rat(static_cast<long>(raw[pi])) - Rat(two_d * s.rho) / Rat(f1);
        if (!pow_ge({{Rat(s.rho), 1 - s.eps_L7 / 2}}, deficit)) {
          pass = false;
          wit = "node #" + std::to_string(pi) + " kept " + std::to_string(raw[pi]);
        }
      }
      add_row(rep, "prop13 item (4)" + tag, pass, !gated, wit);
    }

    // aggregated level count against the stage-floor count
    if (rg.k >= 1) {
      Stage st = stage_of(s, rg.k);
      std::size_t cnt = t.levels[static_cast<std::size_t>(l)].size();
      std::size_t base_cnt = t.levels[static_cast<std::size_t>(st.n)].size();
      bool gated = g_item1 && gates.ok("lemma6 " + kk) && gates.ok("lemma7i " + kk) &&
                   gates.ok("lemma7ii " + kk) && !t.options.uniform_branching &&
                   t.options.sabotage == Sabotage::none;
      bool pass = true;
      bool resolved = true;
      std::string wit;
      if (l <= st.nd()) {
        pass = cnt >= base_cnt;
      } else {
        Int prod(1);
        for (std::size_t i = 0; i < s.d; ++i)
          prod *= rat_floor(rat_power(
              s.R, (Rat(1) + s.aux.wtilde[i]) * Rat(st.nd() + 1 - st.n_i[i]), "eq:card2"));
        Rat base = Rat(static_cast<long>(base_cnt)) * Rat(prod) / 2;
        long m = l - (st.nd() + 1);
        if (m == 0) {
          pass = Rat(static_cast<long>(cnt)) >= base;
        } else if (!eta_ok) {
          gated = false;
          pass = false;
          wit = "no admissible eta";
          resolved = false;
        } else {
          PowerProduct pe = pp_pow(Rat(s.rho), -*eta);
          resolved = false;
          for (int bits : {64, 128, 256}) {
            auto en = pp_enclose(pe, bits);
            Rat rhs_hi = base * rat_pow(Rat(s.rho) * (1 - en.first), m);
            Rat rhs_lo = base * rat_pow(Rat(s.rho) * (1 - en.second), m);
            if (Rat(static_cast<long>(cnt)) >= rhs_hi) {
              pass = true;
              resolved = true;
              break;
            }
            if (Rat(static_cast<long>(cnt)) < rhs_lo) {
              pass = false;
              resolved = true;
              break;
            }
          }
          if (!resolved) {
            pass = false;
            wit = "enclosure unresolved at 256 bits";
          }
        }
      }
      if (wit.empty() && !pass) wit = "count " + std::to_string(cnt);
      add_row(rep, "eq:card2" + tag, pass, !(gated && resolved), wit);
    }
  }

  for (std::size_t bi = 0; bi < trial_boxes.size(); ++bi) {
    const Box& B = trial_boxes[bi];
    if (B.dim() != s.d) throw ConfigError("trial box dimension mismatch");
    Rat ell = B.side(0);
    for (std::size_t i = 1; i < s.d; ++i)
      if (B.side(i) != ell) throw ConfigError("trial boxes must be hypercubes");
    std::string bb = " box=" + std::to_string(bi);
    Rat prev_mass;
    bool mono = true;
    std::string mono_wit;
    for (long l = 0; l <= L; ++l) {
      const auto& lvl = t.levels[static_cast<std::size_t>(l)];
      std::size_t cnt = 0;
      Rat mass(0);
      for (const auto& nd : lvl)
        if (nd.box.intersects_open(B)) {
          ++cnt;
          mass += nd.mu;
        }
      if (l > 0) {
        Regime rg = level_regime(s, l);
        long nk = (rg.k >= 1) ? stage_of(s, rg.k).n : 0;
        std::vector<long> n_i(s.d, 0);
        long ndk = 0;
        if (rg.k >= 1) {
          Stage st = stage_of(s, rg.k);
          for (std::size_t i = 0; i < s.d; ++i) n_i[i] = st.n_i[i];
          ndk = st.nd();
        }
        Rat bound(1);
        for (std::size_t i = 0; i < s.d; ++i) {
          Rat cell_k = tail_side(s, i, nk);
          Rat ratio_k = ell / cell_k;
          Rat factor = 2 * std::max(ratio_k, Rat(1));
          if (l > ndk) {
            Rat cell_i = tail_side(s, i, n_i[i]);
            Rat ratio_i = ell / cell_i;
            Rat grow = rat_power(s.R, (Rat(1) + s.aux.wtilde[i]) * Rat(l - n_i[i]), "eq:prodest");
            Rat inv_i = cell_i / ell;
            factor *= std::min(ratio_i, Rat(1)) * std::max(grow, inv_i);
          }
          bound *= factor;
        }
        bool pass = Rat(static_cast<long>(cnt)) <= bound;
        add_row(rep, "eq:prodest" + bb + " level=" + std::to_string(l), pass, rg.k < 1,
                pass ? "" : "count " + std::to_string(cnt) + " > " + rat_str(bound));
        Rat ratio = Rat(static_cast<long>(cnt)) / Rat(static_cast<long>(lvl.size()));
        bool mu_pass = mass <= ratio;
        add_row(rep, "eq:muB" + bb + " level=" + std::to_string(l), mu_pass,
                !t.options.uniform_branching,
                mu_pass ? "" : "mass " + rat_str(mass) + " > " + rat_str(ratio));
        if (mono && mass > prev_mass) {
          mono = false;
          mono_wit = "level " + std::to_string(l);
        }
      }
      prev_mass = mass;
    }
    add_row(rep, "eq:muB monotone" + bb, mono, false, mono_wit);
  }
  return rep;
}

Vec sample_point(const CantorTree& t, std::uint64_t seed) {
  if (t.levels.empty() || t.levels.front().empty()) throw ConfigError("empty tree");
  std::mt19937_64 gen(seed);
  auto draw = [&]() -> Rat {
    return frac(Int(static_cast<unsigned long>(gen())), Int(1) << 64);
  };
  std::size_t cur = 0;
  {
    Rat target = draw();
    Rat cum(0);
    for (std::size_t i = 0; i < t.levels[0].size(); ++i) {
      cum += t.levels[0][i].mu;
      cur = i;
      if (target < cum) break;
    }
  }
  for (long l = 1; l <= t.depth(); ++l) {
    const auto& lvl = t.levels[static_cast<std::size_t>(l)];
    auto lo_it = std::lower_bound(lvl.begin(), lvl.end(), cur,
                                  [](const CantorNode& n, std::size_t v) { return n.parent < v; });
    auto hi_it = std::upper_bound(lvl.begin(), lvl.end(), cur,
                                  [](std::size_t v, const CantorNode& n) { return v < n.parent; });
    if (lo_it == hi_it) throw ConfigError("node without children at level " + std::to_string(l));
    Rat target = draw() * t.levels[static_cast<std::size_t>(l - 1)][cur].mu;
    Rat cum(0);
    for (auto it = lo_it; it != hi_it; ++it) {
      cum += it->mu;
      cur = static_cast<std::size_t>(it - lvl.begin());
      if (target < cum) break;
    }
  }
  return t.levels[static_cast<std::size_t>(t.depth())][cur].box.center();
}

std::string level_summary_csv(const CantorTree& t) {
  std::ostringstream os;
  os << "level,case,boxes,removed_plane,removed_danger,mu_min,mu_max\n";
  for (const auto& r : t.summary)
    os << r.level << ',' << case_name(r.tag) << ',' << r.boxes << ',' << r.removed_plane << ','
       << r.removed_danger << ',' << rat_str(r.mu_min) << ',' << rat_str(r.mu_max) << '\n';
  return os.str();
}

}  // namespace exactdim::cantor
