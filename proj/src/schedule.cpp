#include "exactdim/schedule.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace exactdim::schedule {

namespace {

Int pow2(unsigned long e) {
  Int r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
  return r;
}

// Everything downstream of R: eps0, the per-axis scale family, and the
// branching count rho.
void derive_from_R(ParameterSchedule& s) {
  const Vec& wt = s.aux.wtilde;
  Int fact = factorial((unsigned)(s.d + 1));
  s.eps0 = pp_pow(s.R, Rat(-2) * (Rat(1) + Rat(1) / wt[0])) * pp_pow(Rat(fact), Rat(-1) / wt[0]);
  s.rho0.clear();
  s.rho_i.clear();
  s.rho = 1;
  for (std::size_t i = 0; i < s.d; ++i) {
    s.rho0.push_back(pp_pow(s.R, -(Rat(1) + wt[i])) * pp(frac(Int(1), fact)));
    s.rho_i.push_back(pp_pow(s.R, Rat(1) + wt[i]));
    s.rho *= s.rho_i.back().floor();
  }
}

PowerProduct rho_pp(const ParameterSchedule& s) {
  PowerProduct r;
  for (const auto& ri : s.rho_i) r = r * pp(Rat(ri.floor()));
  return r;
}

// The bracketed coefficient of -log_R eps_{k-1} in the stage-depth rule:
// max of (2(1+tau w_1)/(1+wtilde_1)+d+1) / (alpha'(tau w_1-wtilde_1)(1-1/(1+wtilde_1))),
// 4, and 2/(tau-1).
Rat depth_coefficient(const ParameterSchedule& s) {
  Rat tw1 = s.tau * s.w.w[0];
  Rat wt1 = s.aux.wtilde[0];
  Rat den = s.alpha_prime * (tw1 - wt1) * (Rat(1) - Rat(1) / (Rat(1) + wt1));
  if (!(den > 0))
    throw ConfigError("stage-depth coefficient has a non-positive denominator (" + rat_str(den) +
                      ")");
  Rat t1 = (Rat(2) * (Rat(1) + tw1) / (Rat(1) + wt1) + Rat((long)s.d) + 1) / den;
  Rat t = std::max(t1, Rat(4));
  return std::max(t, Rat(Rat(2) / (s.tau - 1)));
}

// c_k = 1 - 2^{1-j} with 2^{-j} the smallest dyadic at or above eps_{k-1},
// j capped at 64+k so the denominators stay small; the printed fallback 7/8
// covers eps_{k-1} >= 1/16, where the dyadic form would leave (3/4,1).
Rat contraction_rule(const PowerProduct& eps_prev, int k) {
  Int j = floor_affine_log(Rat(0), Rat(1), Rat(2), eps_prev.inv());
  if (j < 4) return Rat(7) / 8;
  Int cap(64 + k);
  if (j > cap) j = cap;
  return Rat(1) - frac(Int(1), pow2(j.get_ui() - 1));
}

LevelParams faithful_level(const ParameterSchedule& s, const PowerProduct& eps_prev,
                           const Int& nprev_d, int k) {
  const Vec& w = s.w.w;
  const Vec& wt = s.aux.wtilde;
  PowerProduct inv_eps = eps_prev.inv();
  LevelParams L;
  L.n = floor_affine_log(Rat(0), depth_coefficient(s), s.R, inv_eps) + 1;
  Int lower = s.xi * nprev_d + 1;
  if (L.n < lower) L.n = lower;
  for (std::size_t i = 0; i < s.d; ++i) {
    Rat zeta = (Rat(1) + s.tau * w[i]) / (Rat(1) + wt[i]);
    L.n_i.push_back(floor_affine_log(zeta * Rat(L.n), Rat(2) * zeta, s.R, inv_eps) + 1);
  }
  L.eps = pp_pow(Rat(2), Rat(-1) / (w[0] * wt[0])) *
          pp_pow(s.R, -(s.alpha * (Rat(L.n_i.back()) + 1) - Rat(L.n)));
  L.c = contraction_rule(eps_prev, k);
  return L;
}

Int alpha_gap(const ParameterSchedule& s, const LevelParams& L) {
  return s.xi * L.n_i.back() - L.n_i.back() - 1;
}

// First counting display: rho^{-a(1-e)} <= 2^{-(3d+1)} rho0_1
// R^{(tau w_1 - wtilde_1) n^{(1)}} R^{-(d+1)a}. Returns the comparison sign.
int smoothing_first_cmp(const ParameterSchedule& s, const PowerProduct& rho,
                        const LevelParams& L, const Rat& e) {
  Int a = alpha_gap(s, L);
  PowerProduct lhs = rho.pow(-(Rat(1) - e) * Rat(a));
  PowerProduct rhs = pp(frac(Int(1), pow2(3 * (unsigned long)s.d + 1))) * s.rho0[0] *
                     pp_pow(s.R, (s.tau * s.w.w[0] - s.aux.wtilde[0]) * Rat(L.n_i[0])) *
                     pp_pow(s.R, -Rat((long)s.d + 1) * Rat(a));
  return lhs.cmp(rhs);
}

// Second counting display: rho^{-a e/2} <= 1/2.
int smoothing_second_cmp(const ParameterSchedule& s, const PowerProduct& rho,
                         const LevelParams& L, const Rat& e) {
  Int a = alpha_gap(s, L);
  return rho.pow(-Rat(a) * e / 2).cmp(Rat(1, 2));
}

// Largest dyadic m/2^24 passing the first display at every stage, or nullopt
// when even the smallest grid point fails.
std::optional<Rat> bisect_smoothing(const ParameterSchedule& s, const PowerProduct& rho) {
  Int den = pow2(24);
  auto feasible = [&](const Int& m) -> bool {
    Rat e = frac(m, den);
    for (const auto& L : s.levels)
      if (smoothing_first_cmp(s, rho, L, e) > 0) return false;
    return true;
  };
  if (!feasible(1)) return std::nullopt;
  if (feasible(den - 1)) return frac(den - 1, den);
  Int lo = 1, hi = den - 1;
  while (hi - lo > 1) {
    Int mid = (lo + hi) / 2;
    (feasible(mid) ? lo : hi) = mid;
  }
  return frac(lo, den);
}

void require_stage_shape(const std::vector<Int>& n_i, std::size_t d) {
  if (n_i.size() != d) throw ConfigError("per-axis depth vector has the wrong length");
  for (std::size_t i = 1; i < d; ++i)
    if (n_i[i] < n_i[i - 1])
      throw ConfigError("per-axis depths must be non-decreasing with the axis");
}

ParameterSchedule toy_build(ParameterSchedule s, int k_max, const ToyOverrides& toy) {
  if (toy.R) {
    if (!(*toy.R > 1)) throw ConfigError("scale base must exceed 1");
    s.R = *toy.R;
    derive_from_R(s);
  }
  if (toy.xi) {
    if (*toy.xi < 1) throw ConfigError("xi must be a positive integer");
    s.xi = *toy.xi;
  }
  if (toy.eps0) {
    if (!(*toy.eps0 > 0)) throw ConfigError("eps0 must be positive");
    s.eps0 = pp(*toy.eps0);
  }
  if (toy.rho0) {
    if (toy.rho0->size() != s.d) throw ConfigError("rho0 override has the wrong length");
    s.rho0.clear();
    for (const Rat& r : *toy.rho0) {
      if (!(r > 0)) throw ConfigError("rho0 entries must be positive");
      s.rho0.push_back(pp(r));
    }
  }
  s.eps_L7 = toy.eps_L7 ? *toy.eps_L7 : Rat(1, 2);
  s.eta = toy.eta;
  if ((int)toy.n.size() != k_max) throw ConfigError("toy mode needs one n_k per stage");
  if (!toy.n_ki.empty() && (int)toy.n_ki.size() != k_max)
    throw ConfigError("per-axis depth overrides must cover every stage or none");
  if (!toy.eps_k.empty() && (int)toy.eps_k.size() != k_max)
    throw ConfigError("eps_k overrides must cover every stage or none");
  if (!toy.c_k.empty() && (int)toy.c_k.size() != k_max)
    throw ConfigError("c_k overrides must cover every stage or none");

  PowerProduct eps_prev = s.eps0;
  for (int k = 1; k <= k_max; ++k) {
    LevelParams L;
    L.n = toy.n[k - 1];
    if (L.n < 1) throw ConfigError("stage depths must be positive");
    if (toy.n_ki.empty()) {
      PowerProduct inv_eps = eps_prev.inv();
      for (std::size_t i = 0; i < s.d; ++i) {
        Rat zeta = (Rat(1) + s.tau * s.w.w[i]) / (Rat(1) + s.aux.wtilde[i]);
        L.n_i.push_back(floor_affine_log(zeta * Rat(L.n), Rat(2) * zeta, s.R, inv_eps) + 1);
      }
    } else {
      L.n_i = toy.n_ki[k - 1];
      require_stage_shape(L.n_i, s.d);
    }
    if (toy.eps_k.empty()) {
      L.eps = pp_pow(Rat(2), Rat(-1) / (s.w.w[0] * s.aux.wtilde[0])) *
              pp_pow(s.R, -(s.alpha * (Rat(L.n_i.back()) + 1) - Rat(L.n)));
    } else {
      if (!(toy.eps_k[k - 1] > 0)) throw ConfigError("eps_k must be positive");
      L.eps = pp(toy.eps_k[k - 1]);
    }
    L.c = toy.c_k.empty() ? contraction_rule(eps_prev, k) : toy.c_k[k - 1];
    if (!(L.c > 0 && L.c < 1)) throw ConfigError("c_k must lie in (0,1)");
    eps_prev = L.eps;
    s.levels.push_back(std::move(L));
  }
  s.mode = Mode::toy;
  return s;
}

void add(ScheduleReport& rep, std::string name, bool pass, std::string margin) {
  rep.all_pass = rep.all_pass && pass;
  rep.checks.push_back({std::move(name), pass, std::move(margin)});
}

// Slack of the dominant side over the other for a power-product relation:
// exact ratio when it prints short, log2 enclosure otherwise.
std::string slack_str(const PowerProduct& small, const PowerProduct& big) {
  PowerProduct ratio = big / small;
  std::string text = ratio.str();
  if (text.size() <= 96) return "slack " + text;
  auto [lo, hi] = ratio.log2_range(96);
  std::ostringstream os;
  os << "log2 slack in [" << lo.get_d() << ", " << hi.get_d() << "]";
  return os.str();
}

}  // namespace

const PowerProduct& ParameterSchedule::eps_before(std::size_t k) const {
  if (k == 0 || k > levels.size()) throw ConfigError("stage index out of range");
  return k == 1 ? eps0 : levels[k - 2].eps;
}

const CheckResult* ScheduleReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

bool ScheduleReport::ok(const std::string& name) const {
  const CheckResult* c = find(name);
  return c != nullptr && c->pass;
}

Int floor_affine_log(const Rat& c0, const Rat& c1, const Rat& base, const PowerProduct& X) {
  if (!(base > 1)) throw ConfigError("logarithm base must exceed 1");
  if (!(c1 > 0)) throw ConfigError("logarithm coefficient must be positive");
  auto at_most = [&](const Int& m) -> bool {
    return pp_pow(base, (Rat(m) - c0) / c1).cmp(X) <= 0;
  };
  Rat qhi;
  for (unsigned bits = 96;; bits *= 4) {
    auto [xlo, xhi] = X.log2_range(bits);
    auto [rlo, rhi] = pp(base).log2_range(bits);
    if (!(rlo > 0)) continue;  // enclosure too loose for a base near 1
    qhi = (xhi >= 0) ? Rat(xhi / rlo) : Rat(xhi / rhi);
    (void)xlo;
    break;
  }
  Int m = rat_floor(c0 + c1 * qhi);
  while (!at_most(m)) m -= 1;
  while (at_most(m + 1)) m += 1;
  return m;
}

ParameterSchedule base_constants(const weights::WeightVector& w_in, const Rat& tau,
                                 const Rat& delta) {
  ParameterSchedule s;
  s.w = weights::validate_weights(w_in.w);
  s.d = s.w.dim();
  s.tau = tau;
  s.delta = delta;
  s.aux = weights::auxiliary_weights(s.w, tau, delta);
  const Vec& w = s.w.w;
  const Vec& wt = s.aux.wtilde;
  s.alpha = tau * w[0] / wt[0];
  for (std::size_t i = 1; i < s.d; ++i) s.alpha = std::max(s.alpha, Rat(tau * w[i] / wt[i]));
  s.alpha_prime = 1;
  for (std::size_t k = 1; k < s.d; ++k)
    if (w[k] != w[0]) {
      s.alpha_prime = w[k] - w[0];  // ascending, so the first distinct gap is the least
      break;
    }
  s.xi0 = (Rat(1) + tau * w[s.d - 1]) / (Rat(1) + wt[0]) + 1;
  Int xc = rat_ceil(s.xi0);
  s.xi = (Rat(xc) == s.xi0) ? Int(xc + 1) : xc;
  Rat rbound = Rat(8) * Rat(factorial((unsigned)(s.d + 1)));
  s.R = 2;
  while (pp_pow(s.R, Rat(1) + wt[0]).cmp(rbound) <= 0) s.R *= 2;
  derive_from_R(s);
  s.eps_L7 = 0;  // chosen during build
  s.mode = Mode::faithful;
  return s;
}

ParameterSchedule build_schedule(const ParameterSchedule& base, int k_max, Mode mode,
                                 const ToyOverrides& toy) {
  if (k_max < 1) throw ConfigError("k_max must be at least 1");
  ParameterSchedule s = base;
  s.levels.clear();
  if (mode == Mode::toy) return toy_build(std::move(s), k_max, toy);

  for (int attempt = 0; attempt < 40; ++attempt) {
    s.levels.clear();
    PowerProduct eps_prev = s.eps0;
    Int nprev_d = 0;
    for (int k = 1; k <= k_max; ++k) {
      LevelParams L = faithful_level(s, eps_prev, nprev_d, k);
      eps_prev = L.eps;
      nprev_d = L.n_i.back();
      s.levels.push_back(std::move(L));
    }
    PowerProduct rho = rho_pp(s);
    if (auto e = bisect_smoothing(s, rho)) {
      bool second = true;
      for (const auto& L : s.levels)
        second = second && smoothing_second_cmp(s, rho, L, *e) <= 0;
      if (second) {
        s.eps_L7 = *e;
        s.mode = Mode::faithful;
        return s;
      }
    }
    s.R *= 2;  // next power of 2; every derived constant moves with it
    derive_from_R(s);
  }
  throw std::logic_error("no smoothing constant within the scale-doubling budget");
}

ScheduleReport verify_schedule(const ParameterSchedule& s) {
  ScheduleReport rep;
  const Vec& w = s.w.w;
  const Vec& wt = s.aux.wtilde;
  const std::size_t d = s.d;
  Int fact = factorial((unsigned)(d + 1));

  add(rep, "delta admissible", weights::delta_admissible(s.w, s.tau, s.delta), rat_str(s.delta));
  {
    bool ok = false;
    try {
      auto a = weights::auxiliary_weights(s.w, s.tau, s.delta);
      ok = a.wtilde == s.aux.wtilde && a.K == s.aux.K;
    } catch (const ConfigError&) {
    }
    add(rep, "aux identities", ok, "K=" + std::to_string(s.aux.K));
  }
  {
    PowerProduct lhs = pp_pow(s.R, Rat(1) + wt[0]);
    Rat bound = Rat(8) * Rat(fact);
    add(rep, "R lower bound", lhs.cmp(bound) > 0, slack_str(pp(bound), lhs));
  }
  {
    Rat a = s.tau * w[0] / wt[0];
    for (std::size_t i = 1; i < d; ++i) a = std::max(a, Rat(s.tau * w[i] / wt[i]));
    add(rep, "alpha formula", a == s.alpha && s.alpha >= 1, rat_str(s.alpha));
  }
  {
    Rat ap = 1;
    for (std::size_t k = 1; k < d; ++k)
      if (w[k] != w[0]) {
        ap = w[k] - w[0];
        break;
      }
    add(rep, "alpha_prime formula", ap == s.alpha_prime, rat_str(s.alpha_prime));
  }
  {
    Rat xi0 = (Rat(1) + s.tau * w[d - 1]) / (Rat(1) + wt[0]) + 1;
    bool ok = xi0 == s.xi0 && Rat(s.xi) >= s.xi0;
    add(rep, "xi at least xi0", ok, rat_str(Rat(s.xi) - s.xi0));
  }
  {
    PowerProduct want =
        pp_pow(s.R, Rat(-2) * (Rat(1) + Rat(1) / wt[0])) * pp_pow(Rat(fact), Rat(-1) / wt[0]);
    add(rep, "eps0 formula", s.eps0.cmp(want) == 0, slack_str(want, s.eps0));
  }
  {
    bool ok = true;
    for (std::size_t i = 0; i < d; ++i)
      ok = ok && s.rho0[i].cmp(pp_pow(s.R, -(Rat(1) + wt[i])) * pp(frac(Int(1), fact))) == 0;
    add(rep, "rho0 formula", ok, "");
  }
  {
    bool ok = s.rho0.size() == d && s.rho_i.size() == d;
    Int prod = 1;
    for (std::size_t i = 0; i < d && ok; ++i) {
      ok = s.rho_i[i].cmp(pp_pow(s.R, Rat(1) + wt[i])) == 0;
      prod *= s.rho_i[i].floor();
    }
    ok = ok && prod == s.rho;
    add(rep, "rho formula", ok, s.rho.get_str());
  }
  add(rep, "smoothing constant range", s.eps_L7 > 0 && s.eps_L7 < 1, rat_str(s.eps_L7));

  bool depth_coeff_ok = true;
  Rat T;
  try {
    T = depth_coefficient(s);
  } catch (const ConfigError& e) {
    depth_coeff_ok = false;
    add(rep, "stage-depth coefficient", false, e.what());
  }

  PowerProduct rho = rho_pp(s);
  PowerProduct eps_prev = s.eps0;
  Int nprev_d = 0;
  for (std::size_t k = 1; k <= s.levels.size(); ++k) {
    const LevelParams& L = s.levels[k - 1];
    const std::string suf = " k=" + std::to_string(k);
    PowerProduct inv_eps = eps_prev.inv();
    {
      bool ok = L.n_i.size() == d && L.n <= L.n_i.front();
      for (std::size_t i = 1; i < L.n_i.size(); ++i) ok = ok && L.n_i[i - 1] <= L.n_i[i];
      Int xid = s.xi * L.n_i.back();
      ok = ok && L.n_i.back() < xid;
      if (k < s.levels.size()) ok = ok && xid < s.levels[k].n;
      std::ostringstream os;
      os << L.n.get_str() << " <=";
      for (const Int& v : L.n_i) os << " " << v.get_str();
      os << " < " << xid.get_str();
      if (k < s.levels.size()) os << " < " << s.levels[k].n.get_str();
      add(rep, "ordering" + suf, ok, os.str());
    }
    if (depth_coeff_ok) {
      PowerProduct lhs = pp_pow(s.R, Rat(L.n));
      PowerProduct rhs = inv_eps.pow(T);
      bool ok = lhs.cmp(rhs) >= 0 && L.n > s.xi * nprev_d;
      add(rep, "eq:nk" + suf, ok, slack_str(rhs, lhs));
    } else {
      add(rep, "eq:nk" + suf, false, "coefficient anomaly");
    }
    {
      bool ok = L.n_i.size() == d;
      for (std::size_t i = 0; i < d && ok; ++i) {
        Rat zeta = (Rat(1) + s.tau * w[i]) / (Rat(1) + wt[i]);
        ok = L.n_i[i] == floor_affine_log(zeta * Rat(L.n), Rat(2) * zeta, s.R, inv_eps) + 1;
      }
      add(rep, "eq:nki" + suf, ok, "");
    }
    {
      PowerProduct want = pp_pow(Rat(2), Rat(-1) / (w[0] * wt[0])) *
                          pp_pow(s.R, -(s.alpha * (Rat(L.n_i.back()) + 1) - Rat(L.n)));
      add(rep, "eq:epsk" + suf, L.eps.cmp(want) == 0, slack_str(want, L.eps));
    }
    add(rep, "eps decreasing" + suf, L.eps.cmp(eps_prev) < 0, slack_str(L.eps, eps_prev));
    {
      Rat omc = Rat(1) - L.c;
      bool ok = L.c > Rat(3, 4) && L.c < 1 && eps_prev.cmp(omc) < 0;
      add(rep, "c range" + suf, ok, rat_str(L.c));
    }
    {
      PowerProduct lhs = pp_pow(s.R, Rat(L.n_i[0]));
      PowerProduct rhs =
          pp_pow(s.R, (Rat(1) + s.tau * w[0] - wt[0]) * Rat(L.n)) * eps_prev.pow(Rat((long)d));
      add(rep, "eq:wave" + suf, lhs.cmp(rhs) <= 0, slack_str(lhs, rhs));
    }
    for (std::size_t i = 0; i < d; ++i) {
      PowerProduct lhs = pp_pow(s.R, -(Rat(1) + wt[i]) * Rat(L.n_i[i]));
      PowerProduct rhs = pp(Rat(1) - L.c) * eps_prev.pow(Rat(1) + s.tau * w[i]) *
                         pp_pow(s.R, -(Rat(1) + s.tau * w[i]) * Rat(L.n));
      add(rep, "eq:ckcond" + suf + " i=" + std::to_string(i + 1), lhs.cmp(rhs) <= 0,
          slack_str(lhs, rhs));
    }
    {
      Rat rhs = Rat(2) * (Rat(1) + s.tau * w[d - 1]) / (Rat(1) + wt[d - 1]) * Rat(L.n);
      add(rep, "eq:nkdup" + suf, Rat(L.n_i.back()) <= rhs, rat_str(rhs - Rat(L.n_i.back())));
    }
    {
      std::vector<Int> bps = L.n_i;
      bps.push_back(L.n_i.back() + 1);
      std::sort(bps.begin(), bps.end());
      bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
      auto ratio_at = [&](std::size_t i, const Int& n) -> PowerProduct {
        Int m = std::max(n, L.n_i[i]);
        return pp_pow(s.R, -(Rat(1) + s.tau * w[i]) * Rat(n)) /
               (s.rho0[i] * pp_pow(s.R, -(Rat(1) + wt[i]) * Rat(m)));
      };
      for (std::size_t i = 1; i < d; ++i) {
        bool ok = (s.tau * w[0] - wt[0]) <= (s.tau * w[i] - wt[i]);  // tail slope
        bool tight = false;
        for (const Int& n : bps) {
          int c = ratio_at(i, n).cmp(ratio_at(0, n));
          ok = ok && c <= 0;
          tight = tight || c == 0;
        }
        add(rep, "eq:volnpi" + suf + " i=" + std::to_string(i + 1), ok,
            tight ? "equality at a breakpoint" : "");
      }
    }
    {
      PowerProduct lhs = s.rho0[0] * pp_pow(s.R, -(Rat(1) + wt[0]) * Rat(s.xi * L.n_i.back()));
      PowerProduct rhs = pp_pow(s.R, -(Rat(1) + s.tau * w[d - 1]) * (Rat(L.n_i.back()) + 1));
      add(rep, "lemma6" + suf, lhs.cmp(rhs) < 0, slack_str(lhs, rhs));
    }
    if (s.eps_L7 > 0 && s.eps_L7 < 1) {
      Int a = alpha_gap(s, L);
      PowerProduct lhs = rho.pow(-(Rat(1) - s.eps_L7) * Rat(a));
      PowerProduct rhs = pp(frac(Int(1), pow2(3 * (unsigned long)d + 1))) * s.rho0[0] *
                         pp_pow(s.R, (s.tau * w[0] - wt[0]) * Rat(L.n_i[0])) *
                         pp_pow(s.R, -Rat((long)d + 1) * Rat(a));
      add(rep, "lemma7i" + suf, lhs.cmp(rhs) <= 0, slack_str(lhs, rhs));
      PowerProduct lhs2 = rho.pow(-Rat(a) * s.eps_L7 / 2);
      add(rep, "lemma7ii" + suf, lhs2.cmp(Rat(1, 2)) <= 0, slack_str(lhs2, pp(Rat(1, 2))));
    } else {
      add(rep, "lemma7i" + suf, false, "smoothing constant out of range");
      add(rep, "lemma7ii" + suf, false, "smoothing constant out of range");
    }
    eps_prev = L.eps;
    nprev_d = L.n_i.back();
  }
  return rep;
}

}  // namespace exactdim::schedule
