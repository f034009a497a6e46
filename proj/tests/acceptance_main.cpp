// Acceptance gate: one line per shipped guarantee, [PASS] or [FAIL] with the
// elapsed time. Each block re-derives its expected values through an
// independent oracle (direct formula evaluation, dense grid scans, exhaustive
// enumeration) rather than trusting the code path under test. Exits nonzero
// if any line fails; each block also carries a wall-clock budget.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "exactdim/analysis.hpp"
#include "exactdim/cantor.hpp"
#include "exactdim/lattice.hpp"
#include "exactdim/profile.hpp"
#include "exactdim/schedule.hpp"
#include "exactdim/weights.hpp"

using namespace exactdim;
namespace an = exactdim::analysis;
namespace ca = exactdim::cantor;
namespace sc = exactdim::schedule;
namespace wt = exactdim::weights;

namespace {

struct Acc {
  bool ok = true;
  std::string note;
  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      note = what;
    }
  }
};

int g_failures = 0;

template <class F>
void criterion(int idx, const char* label, double budget_s, F&& body) {
  Acc a;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(a);
  } catch (const std::exception& e) {
    a.expect(false, std::string("unexpected exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) a.expect(false, "over the time budget");
  if (!a.ok) ++g_failures;
  std::printf("[%s] %2d. %s (%.2f s)%s%s\n", a.ok ? "PASS" : "FAIL", idx, label, secs,
              a.ok ? "" : ": ", a.ok ? "" : a.note.c_str());
  std::fflush(stdout);
}

Rat rp(long num, long den) { return frac(Int(num), Int(den)); }

wt::WeightVector random_weights(std::mt19937_64& rng, std::size_t d) {
  while (true) {
    std::vector<long> parts(d);
    long total = 0;
    for (long& p : parts) total += (p = 1 + long(rng() % 12));
    std::sort(parts.begin(), parts.end());
    Vec w(d);
    for (std::size_t i = 0; i < d; ++i) w[i] = frac(parts[i], total);
    if (d > 1 && w.back() >= 1) continue;
    return wt::validate_weights(w);
  }
}

// largest dyadic delta the auxiliary construction accepts, then halved so it
// sits strictly inside every precondition
Rat pick_delta(const wt::WeightVector& w, const Rat& tau) {
  for (unsigned long j = 2; j <= 20; ++j) {
    Rat cand = frac(Int(1), Int(1) << j);
    try {
      wt::auxiliary_weights(w, tau, cand);
      return cand / 2;
    } catch (const ConfigError&) {
    }
  }
  throw std::logic_error("no dyadic delta fits");
}

an::PiecewiseLinearProfile profile_for(const wt::WeightVector& w, const Rat& tau,
                                       const Rat& delta) {
  return an::make_profile(w.w, wt::auxiliary_weights(w, tau, delta).wtilde, tau);
}

// two-stage toy schedule reused by the tree criteria
sc::ParameterSchedule toy_schedule() {
  auto base = sc::base_constants(wt::validate_weights({rp(1, 3), rp(2, 3)}), Rat(3), rp(1, 16));
  Int p30, p88;
  mpz_ui_pow_ui(p30.get_mpz_t(), 3, 30);
  mpz_ui_pow_ui(p88.get_mpz_t(), 3, 88);
  sc::ToyOverrides toy;
  toy.R = rp(9, 4);
  toy.xi = 2;
  toy.rho0 = {Rat(1), Rat(1)};
  toy.eps0 = rp(1, 1024);
  toy.n = {1, 8};
  toy.n_ki = {{3, 3}, {9, 12}};
  toy.eps_k = {frac(Int(1) << 24, p30), frac(Int(1) << 82, p88)};
  toy.c_k = {rp(7, 8), rp(7, 8)};
  toy.eps_L7 = rp(1, 2);
  return sc::build_schedule(base, 2, sc::Mode::toy, toy);
}

ca::CantorTree build_toy(long depth, ca::Sabotage sab = ca::Sabotage::none) {
  ca::BuildOptions opt;
  opt.depth = depth;
  opt.uniform_branching = true;
  opt.sabotage = sab;
  return ca::build_tree(toy_schedule(), opt);
}

std::vector<Box> random_squares(const ca::CantorTree& t, std::size_t count, std::uint64_t seed) {
  std::vector<Box> out;
  for (std::size_t i = 0; i < count; ++i) {
    Rat side = frac(Int(1), Int(1) << (2 + i % 6));
    Vec c = ca::sample_point(t, seed + i);
    Box b;
    b.lo.resize(c.size());
    b.hi.resize(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) {
      Rat lo = c[j] - side / 2;
      if (lo < 0) lo = 0;
      if (lo + side > 1) lo = Rat(1) - side;
      b.lo[j] = lo;
      b.hi[j] = lo + side;
    }
    out.push_back(b);
  }
  return out;
}

int shell_exit(const std::string& cmd) {
  int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  if (status < 0 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

const std::string kToyFlags =
    "-w 1/3,2/3 --tau 3 --delta 1/16 --base-scale 9/4 --xi 2 --rho0 1,1 "
    "--eps0 1/1024 --n 1,8 --n-ki '3,3;9,12' "
    "--eps-k '16777216/205891132094649;"
    "4835703278458516698824704/969773729787523602876821942164080815560161' "
    "--c-k 7/8,7/8 --eps-smoothing 1/2";

}  // namespace

int main() {
  criterion(1, "closed dimension formula returns the pinned exact values", 1.0, [](Acc& a) {
    auto one = [&](const Vec& raw, const Rat& tau, const Rat& want) {
      auto w = wt::validate_weights(raw);
      std::size_t d = raw.size();
      a.expect(wt::rynne_dimension(w, tau).value == want, "formula value off");
      Rat best;
      for (std::size_t k = 1; k <= d; ++k) {
        Rat num(long(d) + 1);
        for (std::size_t i = 1; i <= k; ++i) num += tau * (raw[k - 1] - raw[i - 1]);
        Rat v = num / (1 + tau * raw[k - 1]);
        if (k == 1 || v < best) best = v;
      }
      a.expect(best == want, "independent per-term oracle disagrees");
    };
    one({Rat(1)}, Rat(3), rp(1, 2));
    one({rp(1, 2), rp(1, 2)}, Rat(2), rp(3, 2));
    one({rp(1, 3), rp(2, 3)}, Rat(3), rp(4, 3));
  });

  criterion(2, "auxiliary weights satisfy all three construction laws, 200 random inputs", 10.0,
            [](Acc& a) {
              std::mt19937_64 rng(20260817);
              const Rat taus[] = {rp(3, 2), Rat(2), rp(5, 2), Rat(3), Rat(4)};
              for (int it = 0; it < 200; ++it) {
                std::size_t d = 2 + rng() % 2;
                auto w = random_weights(rng, d);
                Rat tau = taus[rng() % 5];
                Rat delta = wt::delta0_bound(w, tau) / Rat(1 + long(rng() % 4));
                auto aux = wt::auxiliary_weights(w, tau, delta);
                Rat sum(0);
                for (std::size_t i = 0; i < d; ++i) {
                  a.expect(aux.wtilde[i] > 0, "nonpositive entry");
                  if (i) a.expect(aux.wtilde[i] >= aux.wtilde[i - 1], "not ascending");
                  sum += aux.wtilde[i];
                  if (int(i) < aux.K)
                    a.expect(aux.wtilde[i] == tau * w.w[i] - delta * (1 + tau * w.w[i]),
                             "steered entry law broken");
                }
                a.expect(sum == 1, "entries do not sum to one");
                a.expect(aux.K >= 0 && std::size_t(aux.K) < d, "tail index out of range");
                Rat cap = tau * w.w[aux.K] - delta * (1 + tau * w.w[aux.K]);
                if (aux.K > 0) {
                  a.expect(aux.wtilde[aux.K - 1] <= aux.wtilde[aux.K], "tail below last steered");
                  a.expect(aux.wtilde[aux.K] < cap, "tail cap not strict");
                } else {
                  a.expect(aux.wtilde[0] <= cap, "tail above its cap");
                }
                for (std::size_t i = aux.K + 1; i < d; ++i)
                  a.expect(aux.wtilde[i] == aux.wtilde[aux.K], "tail not constant");
              }
            });

  criterion(3, "profile minimum equals the recombined lower bound, 50 random inputs", 30.0,
            [](Acc& a) {
              std::mt19937_64 rng(31415);
              const Rat taus[] = {rp(3, 2), Rat(2), rp(5, 2), Rat(3)};
              for (int it = 0; it < 50; ++it) {
                std::size_t d = 2 + rng() % 2;
                auto w = random_weights(rng, d);
                Rat tau = taus[it % 4];
                Rat delta = pick_delta(w, tau);
                auto direct = wt::final_lower_bound(w, tau, delta);
                auto m = an::prop_min(profile_for(w, tau, delta));
                a.expect(m.value == direct.value, "minimum and direct bound differ");
                Rat rynne = wt::rynne_dimension(w, tau).value;
                Rat tol = delta * (Rat(long(d)) + tau);
                a.expect(rat_abs(m.value - rynne) <= tol, "minimum drifts from the formula");
                a.expect(rat_abs(direct.value - rynne) <= tol, "bound drifts from the formula");
              }
            });

  criterion(4, "profile minimum beats a ten-thousand-point grid scan, 100 profiles", 60.0,
            [](Acc& a) {
              std::mt19937_64 rng(2718281);
              const Rat taus[] = {rp(3, 2), Rat(2), rp(5, 2), Rat(3)};
              const long grid = 10000;
              for (int it = 0; it < 100; ++it) {
                std::size_t d = 2 + rng() % 2;
                auto w = random_weights(rng, d);
                Rat tau = taus[it % 4];
                auto p = profile_for(w, tau, pick_delta(w, tau));
                auto m = an::prop_min(p);

                std::vector<Rat> cuts = {Rat(0), Rat(1)};
                cuts.insert(cuts.end(), p.I_breaks.begin(), p.I_breaks.end());
                cuts.insert(cuts.end(), p.J_breaks.begin(), p.J_breaks.end());
                std::sort(cuts.begin(), cuts.end());
                cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
                Rat maxslope(0);
                for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                  if (cuts[i] < 0 || cuts[i + 1] > 1) continue;
                  Rat slope =
                      rat_abs((an::f_eval(p, cuts[i + 1]) - an::f_eval(p, cuts[i])) /
                              (cuts[i + 1] - cuts[i]));
                  if (slope > maxslope) maxslope = slope;
                }

                Rat grid_min;
                for (long j = 0; j <= grid; ++j) {
                  Rat fx = an::f_eval(p, frac(j, grid));
                  if (j == 0 || fx < grid_min) grid_min = fx;
                }
                a.expect(m.value <= grid_min, "grid found a smaller value");
                a.expect(grid_min - m.value <= maxslope / grid, "gap exceeds one grid cell");
              }
            });

  criterion(5, "lattice minima product bounds hold on 100 random shears", 60.0, [](Acc& a) {
    std::mt19937_64 rng(777777);
    std::uniform_int_distribution<int> num(-2, 2), den(1, 3), rad(-2, 2);
    for (int it = 0; it < 100; ++it) {
      std::size_t d = 1 + it % 2;
      Vec x(d);
      for (Rat& c : x) c = frac(num(rng), den(rng));
      SymmetricBox K{Vec(d + 1)};
      for (Rat& r : K.radii) r = rat_pow(Rat(2), rad(rng));
      Budget b;
      auto rep = minkowski_check(K, shear_lattice(x, it % 3 == 0), b);
      a.expect(rep.pass, "two-sided bound violated");
      a.expect(rep.lower <= rep.product && rep.product <= rep.upper, "report inconsistent");
    }
  });

  criterion(6, "close rationals stay on one affine line, 50 small-box instances", 120.0,
            [](Acc& a) {
              std::mt19937_64 rng(424242);
              Vec u{rp(1, 2), rp(1, 2)};
              const Rat R(4);
              for (int it = 0; it < 50; ++it) {
                long n = it % 3;
                long s_lo = n == 0 ? 1 : (n == 1 ? 4 : 16);
                long s_hi = n == 0 ? 3 : (n == 1 ? 15 : 63);
                Int s(s_lo + long(rng() % std::size_t(s_hi - s_lo + 1)));
                Vec center{frac(Int(rng() % mpz_get_ui(s.get_mpz_t())), s),
                           frac(Int(rng() % mpz_get_ui(s.get_mpz_t())), s)};
                Rat side = Rat(1) / (rat_pow(Rat(8), n + 1) * 6);
                Box E{{center[0] - side / 2, center[1] - side / 2},
                      {center[0] + side / 2, center[1] + side / 2}};
                Budget budget;
                auto cert = simplex_certificate(E, n, R, u, rp(1, 200), budget);
                a.expect(cert.hypothesis_ok, "hypothesis did not hold");
                a.expect(!cert.points.empty(), "planted rational not found");
                a.expect(cert.rank <= 1, "points span the plane");
                a.expect(cert.plane.has_value(), "no line certificate");
                if (cert.plane) {
                  for (const RationalVector& rv : cert.points) {
                    Vec val = rv.value();
                    Rat dot = -cert.plane->b;
                    for (std::size_t i = 0; i < 2; ++i) dot += cert.plane->a[i] * val[i];
                    a.expect(dot == 0, "certified line misses a point");
                  }
                }
              }
            });

  criterion(7, "denominator search returns the first witness in range, 50 instances", 60.0,
            [](Acc& a) {
              std::mt19937_64 rng(987654321);
              std::uniform_int_distribution<long> xnum(0, 400), Mpick(3, 9);
              int found = 0, attempts = 0;
              while (found < 50 && attempts < 500) {
                ++attempts;
                std::size_t d = 1 + attempts % 2;
                Vec x(d), u = d == 1 ? Vec{Rat(1)} : Vec{rp(1, 2), rp(1, 2)};
                for (Rat& c : x) c = frac(xnum(rng), 401);
                Rat M(Mpick(rng));
                Rat eps;
                RationalVector got;
                bool have = false;
                for (int j = 1; j <= 14 && !have; ++j) {
                  eps = rat_pow(Rat(2), -j);
                  try {
                    Budget budget;
                    got = intermediate_approximation(x, M, Rat(2) / eps, u, eps, budget);
                    have = true;
                  } catch (const PreconditionViolation&) {
                  }
                }
                if (!have) continue;
                ++found;
                Rat beta = Rat(2) / eps;
                a.expect(Rat(got.q) >= M && Rat(got.q) <= M * beta, "denominator out of range");
                for (Int q = rat_ceil(M);; ++q) {
                  if (Rat(q) > M * beta) {
                    a.expect(false, "oracle exhausted the range");
                    break;
                  }
                  bool ok = true;
                  for (std::size_t i = 0; i < d && ok; ++i) {
                    Int p = rat_ceil(Rat(q) * x[i] - rp(1, 2));
                    Rat diff = rat_abs(x[i] - frac(p, q));
                    long aa = u[i].get_num().get_si(), bb = u[i].get_den().get_si();
                    if (rat_pow(diff, bb) * rat_pow(M, bb + aa) * rat_pow(beta, aa) > 1)
                      ok = false;
                  }
                  if (ok) {
                    a.expect(q == got.q, "not the first admissible denominator");
                    break;
                  }
                }
                for (std::size_t i = 0; i < d; ++i) {
                  Rat diff = rat_abs(x[i] - frac(got.p[i], got.q));
                  long aa = u[i].get_num().get_si(), bb = u[i].get_den().get_si();
                  a.expect(rat_pow(diff, bb) * rat_pow(M, bb + aa) * rat_pow(beta, aa) <= 1,
                           "per-axis bound violated");
                }
              }
              a.expect(found == 50, "too few admissible instances");
            });

  criterion(8, "faithful schedules pass every recorded inequality, nine runs", 120.0,
            [](Acc& a) {
              std::vector<Vec> ws = {{Rat(1)}, {rp(1, 2), rp(1, 2)}, {rp(1, 5), rp(4, 5)}};
              for (const Rat& tau : {rp(3, 2), Rat(2), Rat(3)})
                for (const Vec& raw : ws) {
                  auto w = wt::validate_weights(raw);
                  auto s = sc::build_schedule(sc::base_constants(w, tau, pick_delta(w, tau)), 2,
                                              sc::Mode::faithful);
                  auto rep = sc::verify_schedule(s);
                  a.expect(rep.all_pass, "a schedule inequality failed");
                }
            });

  criterion(9, "toy tree builds through a full epoch with certified mass bounds", 600.0,
            [](Acc& a) {
              auto t = build_toy(7);
              a.expect(t.levels.size() == 8, "depth not reached");

              auto st = ca::verify_structure(t);
              a.expect(st.all_pass, "structure report failed");
              int sides_rows = 0;
              for (const auto& r : st.rows)
                if (r.name.rfind("D1", 0) == 0 || r.name.rfind("D2", 0) == 0 ||
                    r.name.rfind("sides", 0) == 0) {
                  ++sides_rows;
                  a.expect(r.pass, "a side-length row failed: " + r.name);
                }
              a.expect(sides_rows == 8, "missing side-length rows");

              for (std::size_t l = 0; l < t.levels.size(); ++l) {
                Rat total(0);
                for (const auto& nd : t.levels[l]) total += nd.mu;
                a.expect(total == 1, "mass does not sum to one at a level");
              }

              auto pw = ca::verify_pointwise(t, 7, 1);
              a.expect(pw.all_pass, "a binding pointwise row failed");

              auto trials = random_squares(t, 100, 90001);
              auto ct = ca::verify_counts(t, trials);
              a.expect(ct.all_pass, "a binding counting row failed");
              std::size_t mub = 0, prodest = 0;
              for (const auto& r : ct.rows) {
                if (r.name.rfind("eq:muB", 0) == 0) {
                  ++mub;
                  a.expect(r.pass, "a mass bound failed: " + r.name);
                }
                if (r.name.rfind("eq:prodest", 0) == 0) {
                  ++prodest;
                  a.expect(r.pass, "a product bound failed: " + r.name);
                }
              }
              a.expect(mub == trials.size() * 8, "missing mass-bound rows");
              a.expect(prodest == trials.size() * 7, "missing product-bound rows");
            });

  criterion(10, "negative controls: corruption caught, bad inputs rejected, exit codes", 600.0,
            [](Acc& a) {
              auto t = build_toy(7, ca::Sabotage::skip_danger_removal);
              auto pw = ca::verify_pointwise(t, 7, 1);
              a.expect(!pw.all_pass, "corrupted tree still verifies");
              const ca::VerifyRow* row = pw.find("P3 k=1");
              a.expect(row != nullptr, "distinguished-rational row missing");
              if (row) {
                a.expect(!row->pass, "corruption not caught");
                a.expect(row->witness.find("s=20") != std::string::npos &&
                             row->witness.find("r=(3, 15)") != std::string::npos,
                         "witness lacks the denominator pair");
              }

              bool rejected = false;
              try {
                wt::auxiliary_weights(wt::validate_weights({rp(1, 5), rp(4, 5)}), rp(3, 2),
                                      rp(1, 2));
              } catch (const ConfigError&) {
                rejected = true;
              }
              a.expect(rejected, "oversized perturbation accepted");

              const std::string cli = EXACTDIM_CLI_PATH;
              a.expect(shell_exit(cli + " dim -w 1 --tau 3") == 0, "success exit code not 0");
              a.expect(shell_exit(cli + " build " + kToyFlags +
                                  " --depth 7 --sabotage skip_danger_removal -o "
                                  "acc_sabotaged.json") == 0,
                       "sabotage build refused");
              a.expect(shell_exit(cli + " verify --in acc_sabotaged.json") == 1,
                       "failed check exit code not 1");
              a.expect(shell_exit(cli + " dim --frobnicate") == 2, "usage exit code not 2");
              a.expect(shell_exit(cli + " aux -w 1/5,4/5 --tau 3/2 --delta 1/2") == 2,
                       "config error exit code not 2");
            });

  criterion(11, "box-counting slopes recover grid and segment dimensions", 30.0, [](Acc& a) {
    auto grid_points = [](std::size_t d, long m) {
      std::vector<Vec> pts;
      std::vector<long> idx(d, 0);
      while (true) {
        Vec p(d);
        for (std::size_t i = 0; i < d; ++i) p[i] = frac(idx[i], m);
        pts.push_back(p);
        std::size_t axis = d;
        bool done = true;
        while (axis > 0) {
          --axis;
          if (++idx[axis] < m) {
            done = false;
            break;
          }
          idx[axis] = 0;
        }
        if (done) break;
      }
      return pts;
    };
    Vec scales{rp(1, 2), rp(1, 4), rp(1, 8)};
    double s2 = an::box_counting(grid_points(2, 8), scales);
    a.expect(std::abs(s2 - 2.0) < 0.1, "planar grid slope off");
    double s3 = an::box_counting(grid_points(3, 8), scales);
    a.expect(std::abs(s3 - 3.0) < 0.1, "spatial grid slope off");

    std::vector<Vec> seg;
    for (long i = 0; i < 32; ++i) seg.push_back({frac(i, 32), rp(1, 2)});
    double s1 = an::box_counting(seg, {rp(1, 4), rp(1, 8), rp(1, 16)});
    a.expect(std::abs(s1 - 1.0) < 0.15, "segment slope off");
  });

  if (g_failures) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
