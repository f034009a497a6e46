#include "exactdim/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace exactdim::analysis {

namespace {

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

PiecewiseLinearProfile make_profile(const schedule::ParameterSchedule& s) {
  return make_profile(s.w.w, s.aux.wtilde, s.tau);
}

LocalDimReport local_dimension(const cantor::CantorTree& t,
                               const std::vector<Box>& trial_boxes) {
  if (trial_boxes.empty()) throw ConfigError("local dimension needs at least one trial box");
  const auto& s = t.sched;
  const std::size_t d = s.d;
  const long depth = t.depth();
  const PowerProduct& rho1 = s.rho_i[0];
  // log rho_1 = (1+wtilde_1) log R; the only transcendental step, and it
  // only feeds the double-typed diagnostics.
  const double log_rho1 =
      Rat(Rat(1) + s.aux.wtilde[0]).get_d() * std::log(s.R.get_d());
  const PiecewiseLinearProfile prof = make_profile(s);

  LocalDimReport rep;
  rep.aggregate_min = std::numeric_limits<double>::infinity();
  for (std::size_t bi = 0; bi < trial_boxes.size(); ++bi) {
    const Box& B = trial_boxes[bi];
    if (B.dim() != d) throw ConfigError("trial boxes must match the tree dimension");
    Rat ell = B.side(0);
    for (std::size_t i = 0; i < d; ++i) {
      const Rat si = B.side(i);
      if (si <= 0) throw ConfigError("trial boxes must have positive sides");
      if (si > ell) ell = si;
    }
    if (ell >= 1)
      throw ConfigError("box side out of range: side must lie in (0,1), got " + rat_str(ell));

    // Largest n with rho_1^n < 1/side, so rho_1^{-(n+1)} <= side < rho_1^{-n}.
    const Rat inv = Rat(1) / ell;
    long n = 0;
    while (n <= depth + 1 && rho1.pow(Rat(n + 1)).cmp(inv) < 0) ++n;

    // Stage k owning the scale index: n_k < n <= n_{k+1}.
    std::size_t k = 0;
    for (std::size_t j = 1; j <= s.levels.size(); ++j)
      if (s.levels[j - 1].n < n) k = j;
    if (k == 0)
      throw ConfigError("box side out of range: side " + rat_str(ell) +
                        " is too coarse for the first steered stage");
    const Int& n_k = s.levels[k - 1].n;
    const Int& n_k_d = s.levels[k - 1].n_i.back();
    Int n_B = n_k_d + 1;
    if (n_B < n) n_B = n;
    if (n_B > depth)
      throw ConfigError("box side out of range: counting level " + n_B.get_str() +
                        " exceeds the built depth " + std::to_string(depth));

    const auto& lvl = t.levels[static_cast<std::size_t>(n_B.get_si())];
    std::size_t cnt = 0;
    for (const auto& nd : lvl)
      if (nd.box.intersects_open(B)) ++cnt;

    LocalDimRecord rec;
    rec.box_id = bi;
    rec.side = ell;
    rec.n = n;
    rec.n_B = n_B;
    rec.mu_bound = frac(Int(static_cast<unsigned long>(cnt)),
                        Int(static_cast<unsigned long>(lvl.size())));
    rec.f_main_term = f_eval(prof, Rat(n_k) / Rat(n)).get_d();
    if (cnt == 0) {
      rec.log_ell_mu = std::numeric_limits<double>::infinity();
    } else {
      rec.log_ell_mu =
          std::log(static_cast<double>(lvl.size())) / (static_cast<double>(n + 1) * log_rho1) -
          std::log(static_cast<double>(cnt)) / (static_cast<double>(n) * log_rho1);
    }
    rec.residual = rec.log_ell_mu - rec.f_main_term;
    if (rec.log_ell_mu < rep.aggregate_min) rep.aggregate_min = rec.log_ell_mu;
    rep.records.push_back(std::move(rec));
  }
  return rep;
}

std::string local_dimension_csv(const LocalDimReport& r) {
  std::ostringstream os;
  os << "box_id,ell,n,n_B,mu_bound,log_ell_mu,f_main_term,residual\n";
  for (const auto& rec : r.records)
    os << rec.box_id << ',' << rat_str(rec.side) << ',' << rec.n.get_str() << ','
       << rec.n_B.get_str() << ',' << rat_str(rec.mu_bound) << ','
       << fmt_double(rec.log_ell_mu) << ',' << fmt_double(rec.f_main_term) << ','
       << fmt_double(rec.residual) << '\n';
  return os.str();
}

double box_counting(const std::vector<Vec>& points, const Vec& scales) {
  if (points.empty()) throw ConfigError("box counting needs at least one point");
  const std::size_t d = points.front().size();
  for (const auto& p : points)
    if (p.size() != d) throw ConfigError("box counting points must share one dimension");
  Vec uniq;
  for (const auto& sc : scales) {
    if (sc <= 0) throw ConfigError("box counting scales must be positive");
    bool seen = false;
    for (const auto& u : uniq) seen = seen || u == sc;
    if (!seen) uniq.push_back(sc);
  }
  if (uniq.size() < 2) throw ConfigError("box counting needs at least two distinct scales");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& ell : uniq) {
    std::set<std::vector<Int>> cells;
    for (const auto& p : points) {
      std::vector<Int> idx;
      idx.reserve(d);
      for (std::size_t i = 0; i < d; ++i) idx.push_back(rat_floor(Rat(p[i] / ell)));
      cells.insert(std::move(idx));
    }
    const double x = -std::log(ell.get_d());
    const double y = std::log(static_cast<double>(cells.size()));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(uniq.size());
  const double den = sxx - sx * sx / m;
  if (!(den > 0)) throw ConfigError("box counting needs at least two distinct scales");
  return (sxy - sx * sy / m) / den;
}

}  // namespace exactdim::analysis
