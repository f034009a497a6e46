#include "exactdim/weights.hpp"

namespace exactdim::weights {

WeightVector validate_weights(const Vec& raw) {
  if (raw.empty()) throw ConfigError("weight vector is empty");
  Rat sum = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] > 0)) throw ConfigError("weights must be positive");
    if (i && raw[i] < raw[i - 1]) throw ConfigError("weights must be ascending");
    sum += raw[i];
  }
  if (sum != 1) throw ConfigError("weights must sum to 1 (got " + rat_str(sum) + ")");
  if (raw.size() > 1 && raw.back() >= 1) throw ConfigError("weights must lie in (0,1)");
  return WeightVector{raw};
}

DimensionReport rynne_dimension(const WeightVector& w, const Rat& tau) {
  if (!(tau > 1)) throw ConfigError("tau must exceed 1");
  std::size_t d = w.dim();
  DimensionReport rep;
  rep.per_k.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    Rat num = Rat((long)d + 1);
    for (std::size_t i = 0; i <= k; ++i) num += tau * (w.w[k] - w.w[i]);
    rep.per_k[k] = num / (1 + tau * w.w[k]);
    if (k == 0 || rep.per_k[k] < rep.value) {
      rep.value = rep.per_k[k];
      rep.argmin_k = (int)k + 1;
    }
  }
  return rep;
}

bool delta_admissible(const WeightVector& w, const Rat& tau, const Rat& delta) {
  if (!(delta > 0 && delta < 1)) return false;
  std::size_t d = w.dim();
  if (!(delta < (tau - 1) / (tau + Rat((long)d)))) return false;
  auto shifted = [&](std::size_t i) -> Rat { return tau * w.w[i] - delta * (1 + tau * w.w[i]); };
  if (!(shifted(0) > 0)) return false;
  for (std::size_t i = 0; i + 1 < d; ++i)
    if (!(shifted(i) <= shifted(i + 1))) return false;
  Rat inv_d(1, (unsigned long)d);
  if (tau * w.w[0] > inv_d && !(shifted(0) >= inv_d)) return false;
  return true;
}

Rat delta0_bound(const WeightVector& w, const Rat& tau) {
  if (!(tau > 1)) throw ConfigError("tau must exceed 1");
  Rat lo = 0, hi = (tau - 1) / (tau + Rat((long)w.dim()));
  for (int it = 0; it < 64; ++it) {
    Rat mid = (lo + hi) / 2;
    if (delta_admissible(w, tau, mid))
      lo = mid;
    else
      hi = mid;
  }
  Rat d0 = lo / 2;
  if (!(d0 > 0) || !delta_admissible(w, tau, d0))
    throw std::logic_error("delta0 bisection failed its own replay");
  return d0;
}

AuxiliaryWeights auxiliary_weights(const WeightVector& w, const Rat& tau, const Rat& delta) {
  Rat d0 = delta0_bound(w, tau);
  if (!(delta > 0 && delta <= d0))
    throw ConfigError("delta " + rat_str(delta) + " outside (0, " + rat_str(d0) + "]");
  if (!(delta < tau * w.w[0] / (1 + tau * w.w[0])))
    throw ConfigError("delta must be below tau*w_1/(1+tau*w_1)");
  std::size_t d = w.dim();
  AuxiliaryWeights aux;
  aux.delta = delta;
  aux.delta0 = d0;
  auto shifted = [&](std::size_t i) -> Rat { return tau * w.w[i] - delta * (1 + tau * w.w[i]); };
  Rat inv_d(1, (unsigned long)d);
  if (tau * w.w[0] > inv_d) {
    aux.K = 0;
    aux.wtilde.assign(d, inv_d);
  } else {
    int K = -1;
    for (std::size_t h = 1; h + 1 <= d; ++h) {
      Rat v = 0;
      for (std::size_t i = 0; i < h; ++i) v += shifted(i);
      v += Rat((long)(d - h)) * shifted(h);
      if (v > 1) {
        K = (int)h;
        break;
      }
    }
    if (K < 0) throw ConfigError("no admissible cut index for these parameters");
    aux.K = K;
    aux.wtilde.resize(d);
    Rat head = 0;
    for (int i = 0; i < K; ++i) {
      aux.wtilde[i] = shifted(i);
      head += aux.wtilde[i];
    }
    Rat x = (1 - head) / Rat((long)d - K);
    for (std::size_t i = K; i < d; ++i) aux.wtilde[i] = x;
  }
  // invariant replay: ascending, positive, tail below its shifted cap, sum 1
  Rat sum = 0;
  for (std::size_t i = 0; i < d; ++i) {
    if (!(aux.wtilde[i] > 0)) throw std::logic_error("auxiliary weight not positive");
    if (i && aux.wtilde[i] < aux.wtilde[i - 1]) throw std::logic_error("auxiliary weights not ascending");
    sum += aux.wtilde[i];
  }
  if (sum != 1) throw std::logic_error("auxiliary weights do not sum to 1");
  if ((std::size_t)aux.K < d && !(aux.wtilde[aux.K] <= shifted(aux.K)))
    throw std::logic_error("auxiliary tail exceeds its cap");
  return aux;
}

LowerBoundReport final_lower_bound(const WeightVector& w, const Rat& tau, const Rat& delta) {
  AuxiliaryWeights aux = auxiliary_weights(w, tau, delta);
  std::size_t d = w.dim();
  LowerBoundReport rep;
  bool first = true;
  for (std::size_t k = 1; k <= d; ++k) {
    Rat denom = 1 + tau * w.w[k - 1];
    for (std::size_t h = 1; h <= d; ++h) {
      Rat v = Rat((long)(d - h + k));
      for (std::size_t i = 0; i < h; ++i) v += (1 + aux.wtilde[i]) / denom;
      for (std::size_t i = 0; i < k; ++i) v -= (1 + tau * w.w[i]) / denom;
      if (first || v < rep.value) {
        first = false;
        rep.value = v;
        rep.argmin_h = (int)h;
        rep.argmin_k = (int)k;
      }
    }
  }
  rep.k_exceeds_K = rep.argmin_k > aux.K;
  rep.rynne = rynne_dimension(w, tau).value;
  rep.slack = delta * (Rat((long)d) + tau);
  return rep;
}

}  // namespace exactdim::weights
