#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "exactdim/geometry.hpp"
#include "exactdim/power_product.hpp"
#include "exactdim/rational.hpp"
#include "exactdim/weighted_norm.hpp"

using namespace exactdim;

TEST_CASE("rational parsing and formatting") {
  CHECK(parse_rat("3/4") == Rat(3, 4));
  CHECK(parse_rat("-7") == Rat(-7));
  CHECK(parse_rat("0.125") == Rat(1, 8));
  CHECK(parse_rat("-0.5") == Rat(-1, 2));
  CHECK(rat_str(Rat(6, 4)) == "3/2");
  CHECK(rat_str(Rat(5)) == "5");
  CHECK_THROWS_AS(parse_rat("1/0"), ConfigError);
  CHECK_THROWS_AS(parse_rat("x"), ConfigError);
  CHECK_THROWS_AS(parse_rat("1/2.5"), ConfigError);
  auto v = parse_rat_list("1/3,2/3");
  REQUIRE(v.size() == 2);
  CHECK(v[0] == Rat(1, 3));
  CHECK(v[1] == Rat(2, 3));
}

TEST_CASE("integer helpers") {
  CHECK(rat_floor(Rat(7, 2)) == 3);
  CHECK(rat_floor(Rat(-7, 2)) == -4);
  CHECK(rat_ceil(Rat(7, 2)) == 4);
  CHECK(rat_ceil(Rat(-7, 2)) == -3);
  CHECK(nearest_int(Rat(5, 3)) == 2);
  CHECK(int_dist(Rat(5, 3)) == Rat(1, 3));
  CHECK(int_dist(Rat(-1, 4)) == Rat(1, 4));
  CHECK(iroot_floor(Int(26), 3) == 2);
  Int root;
  CHECK(iroot_exact(Int(27), 3, root));
  CHECK(root == 3);
  CHECK_FALSE(iroot_exact(Int(28), 3, root));
  CHECK(factorial(6) == 720);
  CHECK(rat_pow(Rat(2, 3), -2) == Rat(9, 4));
}

TEST_CASE("power product equality is symbolic") {
  CHECK(pp_pow(Rat(4), Rat(1, 2)).cmp(Rat(2)) == 0);
  CHECK(pp_pow(Rat(8), Rat(2, 3)).cmp(Rat(4)) == 0);
  CHECK(pp_pow(Rat(27, 8), Rat(2, 3)).cmp(Rat(9, 4)) == 0);
  CHECK((pp(Rat(12)) / pp(Rat(3)) / pp(Rat(4))).is_one());
  CHECK(pp_pow(Rat(2), Rat(1, 2)).cmp(pp_pow(Rat(3), Rat(1, 3))) < 0);  // 8 < 9
}

TEST_CASE("power product comparisons against rational oracles") {
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<long> num(1, 400), den(1, 400), pe(1, 7), qe(1, 5);
  for (int t = 0; t < 300; ++t) {
    Rat a(num(rng), den(rng));
    a.canonicalize();
    long p = pe(rng), q = qe(rng);
    Rat m(num(rng), den(rng));
    m.canonicalize();
    // a^{p/q} vs m  <=>  a^p vs m^q
    Rat lhs = rat_pow(a, p), rhs = rat_pow(m, q);
    int expect = lhs < rhs ? -1 : (lhs == rhs ? 0 : 1);
    CHECK(pp_pow(a, frac(p, q)).cmp(m) == expect);
  }
}

TEST_CASE("power product decides large mixed-sign exponents") {
  // 2^100000 vs 3^63093: resolved through the log interval path
  Int lhs, rhs;
  mpz_ui_pow_ui(lhs.get_mpz_t(), 2, 100000);
  mpz_ui_pow_ui(rhs.get_mpz_t(), 3, 63093);
  int expect = cmp(lhs, rhs) < 0 ? -1 : 1;
  CHECK(pp_pow(Rat(2), Rat(100000)).cmp(pp_pow(Rat(3), Rat(63093))) == expect);
}

TEST_CASE("power product floor and ceil") {
  CHECK(pp_pow(Rat(2), Rat(7, 2)).floor() == 11);  // floor(8*sqrt(2))
  CHECK(pp_pow(Rat(2), Rat(7, 2)).ceil() == 12);
  CHECK(pp_pow(Rat(27, 8), Rat(2)).floor() == 11);  // floor(729/64)
  CHECK(pp_pow(Rat(9, 4), Rat(3, 2)).floor() == 3);  // 27/8
  CHECK(pp(Rat(7)).floor() == 7);
  CHECK(pp(Rat(7)).ceil() == 7);
  CHECK(pp_pow(Rat(1, 2), Rat(1, 2)).floor() == 0);
  CHECK(pp_pow(Rat(1, 2), Rat(1, 2)).ceil() == 1);
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<long> base(2, 50), p(1, 6), q(2, 4);
  for (int t = 0; t < 200; ++t) {
    long b = base(rng), pe = p(rng), qe = q(rng);
    PowerProduct v = pp_pow(Rat(b), frac(pe, qe));
    Int f = v.floor();
    // f <= b^{p/q} < f+1  <=>  f^q <= b^p < (f+1)^q
    Rat bp = rat_pow(Rat(b), pe);
    CHECK(rat_pow(Rat(f), qe) <= bp);
    CHECK(bp < rat_pow(Rat(f + 1), qe));
  }
}

TEST_CASE("power product rational round trip") {
  Rat x(45, 28);
  PowerProduct v = pp(x);
  CHECK(v.is_rational());
  CHECK(v.to_rational() == x);
  CHECK_FALSE(pp_pow(Rat(2), Rat(1, 2)).is_rational());
  auto [lo, hi] = pp_pow(Rat(2), Rat(1, 2)).log2_range(64);
  CHECK(lo <= Rat(1, 2));
  CHECK(Rat(1, 2) <= hi);
  CHECK(hi - lo < Rat(1, 1000000));
}

TEST_CASE("affine hull on fixed cases") {
  auto empty = affine_hull({}, 2);
  CHECK(empty.rank == 0);
  REQUIRE(empty.plane.has_value());
  CHECK(empty.plane->a == Vec{Rat(1), Rat(0)});
  CHECK(empty.plane->b == 0);

  auto line = affine_hull({{Rat(0), Rat(0)}, {Rat(1), Rat(0)}}, 2);
  CHECK(line.rank == 1);
  REQUIRE(line.plane.has_value());
  CHECK(line.plane->a == Vec{Rat(0), Rat(1)});
  CHECK(line.plane->b == 0);

  auto full = affine_hull({{Rat(0), Rat(0)}, {Rat(1), Rat(1)}, {Rat(2), Rat(1)}}, 2);
  CHECK(full.rank == 2);
  CHECK_FALSE(full.plane.has_value());

  auto point = affine_hull({{Rat(1, 3), Rat(1, 7)}}, 2);
  CHECK(point.rank == 0);
  REQUIRE(point.plane.has_value());
}

TEST_CASE("affine hull rank invariances") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<long> coord(-5, 5);
  for (int t = 0; t < 50; ++t) {
    std::vector<Vec> pts;
    int n = 2 + (int)(rng() % 4);
    for (int i = 0; i < n; ++i) pts.push_back({Rat(coord(rng), 3), Rat(coord(rng), 2), Rat(coord(rng))});
    auto base = affine_hull(pts, 3);
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(affine_hull(shuffled, 3).rank == base.rank);
    // adding a point already in the hull cannot change the rank
    pts.push_back(pts[0]);
    CHECK(affine_hull(pts, 3).rank == base.rank);
    if (base.plane) {
      for (auto& p : pts) {
        Rat s = -base.plane->b;
        for (std::size_t j = 0; j < 3; ++j) s += base.plane->a[j] * p[j];
        CHECK(s == 0);
      }
    }
  }
}

TEST_CASE("plane meets box: fixed cases and corner oracle") {
  AffinePlane x1{{Rat(1), Rat(0)}, Rat(0)};
  CHECK(plane_meets_box(x1, {Rat(0), Rat(0)}, {Rat(1, 2), Rat(1, 2)}));
  AffinePlane x1_shift{{Rat(1), Rat(0)}, Rat(1)};
  CHECK_FALSE(plane_meets_box(x1_shift, {Rat(0), Rat(0)}, {Rat(1, 2), Rat(1, 2)}));
  AffinePlane diag{{Rat(1), Rat(1)}, Rat(1)};
  CHECK(plane_meets_box(diag, {Rat(1, 4), Rat(1, 4)}, {Rat(1, 4), Rat(1, 4)}));

  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<long> coef(-3, 3), pos(-8, 8);
  for (int t = 0; t < 400; ++t) {
    AffinePlane pl;
    pl.a = {Rat(coef(rng)), Rat(coef(rng))};
    if (pl.a[0] == 0 && pl.a[1] == 0) pl.a[0] = 1;
    pl.b = Rat(pos(rng), 4);
    Vec c = {Rat(pos(rng), 8), Rat(pos(rng), 8)};
    Vec r = {Rat(1 + (long)(rng() % 4), 8), Rat(1 + (long)(rng() % 4), 8)};
    bool pos_seen = false, neg_seen = false, zero_seen = false;
    for (int m = 0; m < 4; ++m) {
      Vec v = {c[0] + ((m & 1) ? r[0] : -r[0]), c[1] + ((m & 2) ? r[1] : -r[1])};
      Rat s = pl.a[0] * v[0] + pl.a[1] * v[1] - pl.b;
      if (s > 0) pos_seen = true;
      else if (s < 0) neg_seen = true;
      else zero_seen = true;
    }
    bool oracle = zero_seen || (pos_seen && neg_seen) || (!pos_seen && !neg_seen);
    CHECK(plane_meets_box(pl, c, r) == oracle);
  }
}

TEST_CASE("subdivision tilings") {
  Box unit2{{Rat(0), Rat(0)}, {Rat(1), Rat(1)}};
  auto a = subdivide(unit2, {Rat(1, 2), Rat(1, 2)});
  CHECK(a.full.size() == 4);
  CHECK(a.remainder.empty());

  auto b = subdivide(unit2, {Rat(2, 5), Rat(2, 5)});
  CHECK(b.full.size() == 4);
  CHECK(b.remainder.size() == 5);
  Rat vol = 0;
  for (auto& bx : b.full) vol += bx.volume();
  for (auto& bx : b.remainder) vol += bx.volume();
  CHECK(vol == 1);
  for (auto& bx : b.full) {
    CHECK(bx.side(0) == Rat(2, 5));
    CHECK(bx.side(1) == Rat(2, 5));
  }

  Box unit1{{Rat(0)}, {Rat(1)}};
  auto c = subdivide(unit1, {Rat(1)});
  CHECK(c.full.size() == 1);
  CHECK(c.remainder.empty());

  // high anchor flushes the remainder strip to the low side
  auto d = subdivide(unit1, {Rat(2, 5)}, 1u);
  REQUIRE(d.full.size() == 2);
  CHECK(d.remainder.size() == 1);
  CHECK(d.remainder[0].lo[0] == 0);
  CHECK(d.full[0].lo[0] == Rat(1, 5));

  Box cell = grid_cell(unit1, {Rat(2, 5)}, {-1});
  CHECK(cell.lo[0] == Rat(3, 5));
  CHECK(cell.hi[0] == Rat(1));
}

TEST_CASE("weighted norm comparisons") {
  CHECK(weighted_norm_cmp({Rat(0), Rat(0)}, {Rat(1, 2), Rat(1, 2)}, Rat(1)) == -1);
  CHECK(weighted_norm_cmp({Rat(1, 4), Rat(1, 2)}, {Rat(1, 2), Rat(1, 2)}, Rat(1, 4)) == 0);
  CHECK(weighted_norm_cmp({Rat(1, 2)}, {Rat(1)}, Rat(1, 3)) == 1);
  CHECK_THROWS_AS(weighted_norm_cmp({Rat(1)}, {Rat(2)}, Rat(1)), ConfigError);
  CHECK_THROWS_AS(weighted_norm_cmp({Rat(1)}, {Rat(1)}, Rat(0)), ConfigError);
}

TEST_CASE("weighted norm scaling invariance") {
  // ||(t^{u_1} x_1, ..., t^{u_d} x_d)||_u = t * ||x||_u, on square t so the
  // scaled coordinates stay rational for u = (1/2, 1/2)
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<long> num(-20, 20), den(1, 20);
  Vec u = {Rat(1, 2), Rat(1, 2)};
  for (int t = 0; t < 100; ++t) {
    Vec x = {Rat(num(rng), den(rng)), Rat(num(rng), den(rng))};
    Rat c(1 + (long)(rng() % 30), den(rng));
    Rat scale(9, 4), root(3, 2);
    Vec xs = {root * x[0], root * x[1]};
    CHECK(weighted_norm_cmp(xs, u, scale * c) == weighted_norm_cmp(x, u, c));
  }
}

TEST_CASE("weighted norm approximation") {
  CHECK(weighted_norm_approx({Rat(1, 4), Rat(1, 2)}, {Rat(1, 2), Rat(1, 2)}, 10) == Rat(1, 4));
  CHECK(weighted_norm_approx({Rat(0)}, {Rat(1)}, 5) == 0);
  // max{(1/2)^3, (1/3)^{3/2}} = 3^{-3/2}
  Rat v = weighted_norm_approx({Rat(1, 2), Rat(1, 3)}, {Rat(1, 3), Rat(2, 3)}, 12);
  PowerProduct truth = pp_pow(Rat(3), Rat(-3, 2));
  Rat tol(1, 1000000000);
  CHECK(truth.cmp(v - tol) > 0);
  CHECK(truth.cmp(v + tol) < 0);
}

TEST_CASE("dangerous rationals: fixed cases") {
  Budget budget;
  Box small{{Rat(0), Rat(0)}, {Rat(1, 100), Rat(1, 100)}};
  auto r1 = dangerous_rationals(small, 1, 2, {Rat(1, 2), Rat(1, 2)}, Rat(1, 2), budget);
  bool has_origin = false;
  for (auto& rv : r1)
    if (rv.q == 1 && rv.p[0] == 0 && rv.p[1] == 0) has_origin = true;
  CHECK(has_origin);

  Box third{{Rat(1, 3) - Rat(1, 50)}, {Rat(1, 3) + Rat(1, 50)}};
  auto r2 = dangerous_rationals(third, 3, 4, {Rat(1)}, Rat(1, 10), budget);
  REQUIRE(r2.size() == 1);
  CHECK(r2[0].q == 3);
  CHECK(r2[0].p[0] == 1);

  // eps far below the distance of E to every r/s grid point
  Box offgrid{{Rat(399, 1000)}, {Rat(401, 1000)}};
  auto r3 = dangerous_rationals(offgrid, 2, 3, {Rat(1)}, Rat(1, 100), budget);
  CHECK(r3.empty());
}

TEST_CASE("dangerous rationals agree with clamp-point oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<long> num(-10, 30), den(20, 60);
  for (int t = 0; t < 40; ++t) {
    Box E;
    Rat a(num(rng), den(rng)), b(num(rng), den(rng));
    if (a == b) b = a + Rat(1, 7);
    E.lo = {std::min(a, b)};
    E.hi = {std::max(a, b)};
    Rat c(num(rng), den(rng)), e(num(rng), den(rng));
    if (c == e) e = c + Rat(1, 9);
    E.lo.push_back(std::min(c, e));
    E.hi.push_back(std::max(c, e));
    Vec u = {Rat(1, 3), Rat(2, 3)};
    Rat eps(1 + (long)(rng() % 40), 50);
    Budget budget;
    auto got = dangerous_rationals(E, 2, 5, u, eps, budget);
    std::size_t oracle_count = 0;
    for (Int s = 2; s < 5; ++s) {
      Int rlo0 = rat_floor(Rat(s) * E.lo[0]) - 3, rhi0 = rat_ceil(Rat(s) * E.hi[0]) + 3;
      Int rlo1 = rat_floor(Rat(s) * E.lo[1]) - 3, rhi1 = rat_ceil(Rat(s) * E.hi[1]) + 3;
      for (Int r0 = rlo0; r0 <= rhi0; ++r0)
        for (Int r1 = rlo1; r1 <= rhi1; ++r1) {
          // nearest point of E to r/s, axis by axis
          Vec xstar(2);
          Vec rr = {Rat(r0), Rat(r1)};
          for (int i = 0; i < 2; ++i) {
            Rat y = rr[i] / Rat(s);
            xstar[i] = std::min(std::max(y, E.lo[i]), E.hi[i]);
          }
          Vec diff = {Rat(s) * xstar[0] - rr[0], Rat(s) * xstar[1] - rr[1]};
          if (weighted_norm_cmp(diff, u, eps / Rat(s)) <= 0) {
            ++oracle_count;
            bool found = false;
            for (auto& rv : got)
              if (rv.q == s && rv.p[0] == r0 && rv.p[1] == r1) found = true;
            CHECK(found);
          }
        }
    }
    CHECK(got.size() == oracle_count);
  }
}

TEST_CASE("dangerous rationals respect the budget") {
  Box E{{Rat(0), Rat(0)}, {Rat(1), Rat(1)}};
  Budget tiny;
  tiny.limit = 10;
  CHECK_THROWS_AS(dangerous_rationals(E, 1, 100, {Rat(1, 2), Rat(1, 2)}, Rat(1, 2), tiny),
                  BudgetExceeded);
}
