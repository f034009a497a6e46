#include "exactdim/profile.hpp"

#include <algorithm>

#include "exactdim/weights.hpp"

namespace exactdim::analysis {

namespace {

Vec distinct_ascending(Vec v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

PiecewiseLinearProfile make_profile(const Vec& w, const Vec& wtilde, const Rat& tau) {
  weights::validate_weights(w);
  weights::validate_weights(wtilde);
  if (w.size() != wtilde.size()) throw ConfigError("weight vectors differ in length");
  if (tau <= 1) throw ConfigError("tau must exceed 1");

  PiecewiseLinearProfile p;
  p.d = w.size();
  p.log_rho_ratios.resize(p.d);
  p.zeta.resize(p.d);
  Vec ib(p.d), jb(p.d);
  for (std::size_t i = 0; i < p.d; ++i) {
    p.log_rho_ratios[i] = (1 + wtilde[i]) / (1 + wtilde[0]);
    p.zeta[i] = (1 + tau * w[i]) / (1 + wtilde[i]);
    if (p.zeta[i] <= 1) throw ConfigError("zeta must exceed 1 (tau w_i must exceed wtilde_i)");
    ib[i] = Rat(1) / p.log_rho_ratios[i];
    jb[i] = Rat(1) / (p.zeta[i] * p.log_rho_ratios[i]);
  }
  p.I_breaks = distinct_ascending(ib);
  p.J_breaks = distinct_ascending(jb);
  return p;
}

Rat f_eval(const PiecewiseLinearProfile& p, const Rat& x) {
  if (x < 0 || x > 1) throw ConfigError("profile argument outside [0,1]");
  Rat f(0);
  for (std::size_t i = 0; i < p.d; ++i) {
    Rat rx = p.log_rho_ratios[i] * x;
    f += rx < 1 ? rx : Rat(1);
    Rat m = 1 - p.zeta[i] * rx;
    if (m > 0) f += m;
  }
  return f;
}

ProfileMinimum prop_min(const PiecewiseLinearProfile& p) {
  // segment slope over I_h with k max-terms active is
  // sum_{i<=h} r_i - sum_{i<=k} zeta_i r_i, non-decreasing in h
  for (std::size_t k = 0; k <= p.d; ++k) {
    Rat drop(0);
    for (std::size_t i = 0; i < k; ++i) drop += p.zeta[i] * p.log_rho_ratios[i];
    Rat prev;
    Rat acc(0);
    for (std::size_t h = 1; h <= p.d; ++h) {
      acc += p.log_rho_ratios[h - 1];
      Rat slope = acc - drop;
      if (h > 1 && slope < prev)
        throw std::logic_error("profile segment slopes decreased in h");
      prev = slope;
    }
  }

  ProfileMinimum best;
  for (std::size_t k = 1; k <= p.d; ++k) {
    Rat xk = Rat(1) / (p.zeta[k - 1] * p.log_rho_ratios[k - 1]);
    Rat fk = f_eval(p, xk);
    if (best.argmin_k == 0 || fk < best.value) {
      best.value = fk;
      best.argmin_k = int(k);
      best.x_star = xk;
    }
  }
  return best;
}

}  // namespace exactdim::analysis
