#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <random>

#include "doctest.h"
#include "exactdim/lattice.hpp"

using namespace exactdim;

namespace {

Vec combine(const LatticeBasis& L, const std::vector<Int>& z) {
  Vec v(L.dim(), Rat(0));
  for (std::size_t j = 0; j < L.dim(); ++j)
    for (std::size_t i = 0; i < L.dim(); ++i) v[i] += Rat(z[j]) * L.basis[j][i];
  return v;
}

// gauge-sorted greedy over a fixed coefficient window; exact when the window
// covers every point of gauge <= lambda_n
Vec brute_minima(const SymmetricBox& K, const LatticeBasis& L, long W) {
  const std::size_t n = K.dim();
  std::vector<std::pair<Rat, Vec>> pts;
  std::vector<Int> z(n, Int(-W));
  while (true) {
    bool zero = std::all_of(z.begin(), z.end(), [](const Int& c) { return c == 0; });
    if (!zero) {
      Vec v = combine(L, z);
      pts.push_back({K.gauge(v), v});
    }
    std::size_t axis = n;
    bool done = true;
    while (axis > 0) {
      --axis;
      if (z[axis] < W) {
        ++z[axis];
        for (std::size_t j = axis + 1; j < n; ++j) z[j] = -W;
        done = false;
        break;
      }
      z[axis] = -W;
    }
    if (done) break;
  }
  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Vec lambda;
  std::vector<Vec> picked;
  for (const auto& [g, v] : pts) {
    if (picked.size() == n) break;
    std::vector<Vec> rows = picked;
    rows.push_back(v);
    if (rref(rows) == int(picked.size()) + 1) {
      picked.push_back(v);
      lambda.push_back(g);
    }
  }
  REQUIRE(picked.size() == n);
  return lambda;
}

}  // namespace

TEST_CASE("shear bases") {
  LatticeBasis id = shear_lattice({Rat(0), Rat(0)});
  CHECK(id.dim() == 3);
  CHECK(basis_determinant(id) == 1);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 3; ++i) CHECK(id.basis[j][i] == (i == j ? 1 : 0));

  LatticeBasis half = shear_lattice({Rat(1, 2)});
  CHECK(half.basis[0] == Vec{Rat(1), Rat(0)});
  CHECK(half.basis[1] == Vec{Rat(1, 2), Rat(1)});
  CHECK(basis_determinant(half) == 1);

  Vec x{Rat(2, 3), Rat(-1, 5)};
  LatticeBasis plain = shear_lattice(x);
  LatticeBasis flip = shear_lattice(x, true);
  CHECK(rat_abs(basis_determinant(plain)) == 1);
  CHECK(rat_abs(basis_determinant(flip)) == 1);

  // both conventions generate (q x - p, q) with integer coefficients
  std::vector<Int> p{Int(3), Int(-2)};
  Int q(7);
  Vec target{Rat(q) * x[0] - Rat(p[0]), Rat(q) * x[1] - Rat(p[1]), Rat(q)};
  CHECK(combine(plain, {-p[0], -p[1], q}) == target);
  CHECK(combine(flip, {p[0], p[1], q}) == target);
}

TEST_CASE("successive minima of the standard lattice") {
  Budget budget;
  LatticeBasis id3 = shear_lattice({Rat(0), Rat(0)});
  MinimaReport unit = successive_minima(SymmetricBox{{Rat(1), Rat(1), Rat(1)}}, id3, budget);
  CHECK(unit.lambda == Vec{Rat(1), Rat(1), Rat(1)});

  LatticeBasis id2 = shear_lattice({Rat(0)});
  SymmetricBox K{{Rat(1, 2), Rat(2)}};
  MinimaReport skew = successive_minima(K, id2, budget);
  CHECK(skew.lambda == Vec{Rat(1, 2), Rat(2)});
  CHECK(K.gauge(skew.witnesses[0]) == Rat(1, 2));
  CHECK(K.gauge(skew.witnesses[1]) == Rat(2));

  // dilating the body by t scales every minimum by 1/t
  Rat t(3, 2);
  MinimaReport scaled = successive_minima(SymmetricBox{{t * Rat(1, 2), t * Rat(2)}}, id2, budget);
  for (std::size_t i = 0; i < 2; ++i) CHECK(scaled.lambda[i] * t == skew.lambda[i]);
}

TEST_CASE("minima witnesses stay independent with matching gauges") {
  std::mt19937_64 rng(20240811);
  std::uniform_int_distribution<int> num(-2, 2), den(1, 4), rad(0, 2);
  const Rat radii_pool[3] = {Rat(1, 2), Rat(1), Rat(2)};
  for (int it = 0; it < 25; ++it) {
    std::size_t d = 1 + (it % 2);
    Vec x(d);
    for (Rat& c : x) c = frac(num(rng), den(rng));
    SymmetricBox K{Vec(d + 1)};
    for (Rat& r : K.radii) r = radii_pool[rad(rng)];
    LatticeBasis L = shear_lattice(x);

    Budget budget;
    MinimaReport rep = successive_minima(K, L, budget);
    REQUIRE(rep.lambda.size() == d + 1);
    for (std::size_t i = 0; i + 1 < rep.lambda.size(); ++i)
      CHECK(rep.lambda[i] <= rep.lambda[i + 1]);
    for (std::size_t i = 0; i < rep.lambda.size(); ++i)
      CHECK(K.gauge(rep.witnesses[i]) == rep.lambda[i]);
    std::vector<Vec> rows = rep.witnesses;
    CHECK(rref(rows) == int(d) + 1);

    CHECK(rep.lambda == brute_minima(K, L, 13));
  }
}

TEST_CASE("volume times minima stays inside the two-sided bound") {
  Budget budget;
  LatticeBasis id2 = shear_lattice({Rat(0)});
  MinkowskiReport cube = minkowski_check(SymmetricBox{{Rat(1), Rat(1)}}, id2, budget);
  CHECK(cube.product == 4);
  CHECK(cube.lower == 2);
  CHECK(cube.upper == 4);
  CHECK(cube.pass);

  MinkowskiReport skew = minkowski_check(SymmetricBox{{Rat(1, 2), Rat(2)}}, id2, budget);
  CHECK(skew.product == 4);
  CHECK(skew.pass);

  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> num(-2, 2), den(1, 3), rad(-2, 2);
  for (int it = 0; it < 30; ++it) {
    std::size_t d = 1 + (it % 2);
    Vec x(d);
    for (Rat& c : x) c = frac(num(rng), den(rng));
    SymmetricBox K{Vec(d + 1)};
    for (Rat& r : K.radii) r = rat_pow(Rat(2), rad(rng));
    Budget b;
    CHECK(minkowski_check(K, shear_lattice(x, it % 3 == 0), b).pass);
  }

  LatticeBasis doubled;
  doubled.basis = {Vec{Rat(2), Rat(0)}, Vec{Rat(0), Rat(1)}};
  Budget b2;
  CHECK_THROWS_AS(minkowski_check(SymmetricBox{{Rat(1), Rat(1)}}, doubled, b2), ConfigError);
}

TEST_CASE("coplanarity certificate") {
  Vec u{Rat(1, 2), Rat(1, 2)};

  SUBCASE("no rational comes close: empty point set") {
    Rat c = Rat(1, 2) + Rat(1, 1000);
    Rat t(1, 1000000000);
    Box E{{c - t, c - t}, {c + t, c + t}};
    Budget budget;
    SimplexCertificate cert = simplex_certificate(E, 1, Rat(4), u, Rat(1, 1000000000), budget);
    CHECK(cert.hypothesis_ok);
    CHECK(cert.points.empty());
    CHECK(cert.rank == 0);
    CHECK(cert.plane.has_value());
  }

  SUBCASE("an exact rational center is picked up and fits a plane") {
    Rat c(1, 7);
    Rat t(1, 100000000);
    Box E{{c - t, c - t}, {c + t, c + t}};
    Budget budget;
    SimplexCertificate cert = simplex_certificate(E, 1, Rat(4), u, Rat(1, 1000), budget);
    CHECK(cert.hypothesis_ok);
    REQUIRE(!cert.points.empty());
    for (const RationalVector& rv : cert.points) CHECK(rv.value() == Vec{c, c});
    CHECK(cert.rank <= 1);
    CHECK(cert.plane.has_value());
  }

  SUBCASE("randomized: hypothesis instances stay within rank d-1") {
    std::mt19937_64 rng(424242);
    std::uniform_int_distribution<long> spick(4, 15), rpick(0, 15), npick(0, 1);
    for (int it = 0; it < 40; ++it) {
      long n = npick(rng);
      Rat R(4);
      Int s = n == 0 ? Int(1 + rpick(rng) % 3) : Int(spick(rng));
      Vec center{frac(rpick(rng), s), frac(rpick(rng), s)};
      // sides at the hypothesis cap R^{-(1+u_i)(n+1)} / 3! = 4^{-3(n+1)/2} / 6
      Rat side = Rat(1) / (rat_pow(Rat(8), n + 1) * 6);
      Box E{{center[0] - side / 2, center[1] - side / 2},
            {center[0] + side / 2, center[1] + side / 2}};
      Budget budget;
      SimplexCertificate cert = simplex_certificate(E, n, R, u, Rat(1, 200), budget);
      CHECK(cert.hypothesis_ok);
      CHECK(!cert.points.empty());
      CHECK(cert.rank <= 1);
      REQUIRE(cert.plane.has_value());
      for (const RationalVector& rv : cert.points) {
        Vec val = rv.value();
        Rat dot = -cert.plane->b;
        for (std::size_t i = 0; i < 2; ++i) dot += cert.plane->a[i] * val[i];
        CHECK(dot == 0);
      }
    }
  }

  SUBCASE("oversized eps forfeits the hypothesis and can span full rank") {
    Box E{{Rat(0), Rat(0)}, {Rat(1, 4), Rat(1, 4)}};
    Budget budget;
    SimplexCertificate cert = simplex_certificate(E, 1, Rat(4), u, Rat(1), budget);
    CHECK(!cert.hypothesis_ok);
    CHECK(cert.rank == 2);
    CHECK(!cert.plane.has_value());
  }
}

TEST_CASE("denominator search between M and M beta") {
  SUBCASE("golden-style target lands on its own denominator") {
    Vec x{Rat(8, 13)};
    Budget budget;
    RationalVector pq =
        intermediate_approximation(x, Rat(10), Rat(20), {Rat(1)}, Rat(1, 5), budget);
    CHECK(pq.q == 13);
    CHECK(pq.p == std::vector<Int>{Int(8)});
  }

  SUBCASE("a nearby small-denominator rational violates the gap hypothesis") {
    Vec x{Rat(1000001, 2000000)};
    Budget budget;
    CHECK_THROWS_AS(
        intermediate_approximation(x, Rat(10), Rat(20), {Rat(1)}, Rat(1, 5), budget),
        PreconditionViolation);
  }

  SUBCASE("single s=1 gap check, then any q in range works") {
    Vec x{Rat(1, 2), Rat(1, 2)};
    Budget budget;
    RationalVector pq = intermediate_approximation(x, Rat(11, 10), Rat(40), {Rat(1, 2), Rat(1, 2)},
                                                   Rat(1, 4), budget);
    CHECK(pq.q >= 2);
    CHECK(Rat(pq.q) <= Rat(11, 10) * 40);
    CHECK(frac(pq.p[0], pq.q) == Rat(1, 2));
  }

  SUBCASE("scan agrees with an exhaustive oracle and meets both conclusions") {
    std::mt19937_64 rng(987654321);
    std::uniform_int_distribution<long> xnum(0, 400), Mpick(3, 9);
    for (int it = 0; it < 30; ++it) {
      std::size_t d = 1 + (it % 2);
      Vec x(d), u(d);
      for (Rat& c : x) c = frac(xnum(rng), 401);
      u = d == 1 ? Vec{Rat(1)} : Vec{Rat(1, 2), Rat(1, 2)};
      Rat M(Mpick(rng));

      // largest eps = 2^-j accepted by the gap precheck, if any
      Rat eps;
      RationalVector got;
      bool found = false;
      for (int j = 1; j <= 14 && !found; ++j) {
        eps = rat_pow(Rat(2), -j);
        try {
          Budget budget;
          got = intermediate_approximation(x, M, Rat(2) / eps, u, eps, budget);
          found = true;
        } catch (const PreconditionViolation&) {
        }
      }
      if (!found) continue;

      Rat beta = Rat(2) / eps;
      CHECK(Rat(got.q) >= M);
      CHECK(Rat(got.q) <= M * beta);
      // oracle: first q whose nearest numerators meet the per-axis bound
      for (Int q = rat_ceil(M);; ++q) {
        REQUIRE(Rat(q) <= M * beta);
        bool ok = true;
        for (std::size_t i = 0; i < d && ok; ++i) {
          Int p = rat_ceil(Rat(q) * x[i] - Rat(1, 2));
          Rat diff = rat_abs(x[i] - frac(p, q));
          long a = u[i].get_num().get_si(), b = u[i].get_den().get_si();
          if (rat_pow(diff, b) * rat_pow(M, b + a) * rat_pow(beta, a) > 1) ok = false;
        }
        if (ok) {
          CHECK(q == got.q);
          break;
        }
      }
      for (std::size_t i = 0; i < d; ++i) {
        Rat diff = rat_abs(x[i] - frac(got.p[i], got.q));
        long a = u[i].get_num().get_si(), b = u[i].get_den().get_si();
        CHECK(rat_pow(diff, b) * rat_pow(M, b + a) * rat_pow(beta, a) <= 1);
      }
    }
  }

  SUBCASE("rejects beta <= 1/eps") {
    Budget budget;
    CHECK_THROWS_AS(
        intermediate_approximation({Rat(1, 2)}, Rat(2), Rat(3), {Rat(1)}, Rat(1, 4), budget),
        ConfigError);
  }
}

TEST_CASE("budget cuts off runaway enumeration") {
  Budget tiny;
  tiny.limit = 10;
  SymmetricBox K{{Rat(1), Rat(1), Rat(1)}};
  CHECK_THROWS_AS(successive_minima(K, shear_lattice({Rat(1, 3), Rat(1, 5)}), tiny),
                  BudgetExceeded);
}
