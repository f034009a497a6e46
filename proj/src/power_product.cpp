#include "exactdim/power_product.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

namespace exactdim {

namespace {

// Trial division; bases in this codebase are small (grid ratios, factorials,
// floors of parameter powers), so a 10^6 bound plus a primality check on the
// cofactor covers everything that can legitimately appear.
void factor_into(const Int& n, long mult, std::map<Int, long>& out) {
  Int m = n;
  if (m <= 0) throw ConfigError("power product base must be positive");
  auto push = [&](const Int& p, long e) {
    if (e != 0) out[p] += e;
  };
  long e2 = 0;
  while (mpz_even_p(m.get_mpz_t())) {
    m /= 2;
    ++e2;
  }
  push(2, e2 * mult);
  for (Int p = 3; p * p <= m && p < 1000000; p += 2) {
    long e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    push(p, e * mult);
  }
  if (m > 1) {
    if (mpz_probab_prime_p(m.get_mpz_t(), 40) == 0) {
      // perfect-power split covers composite cofactors of small primes
      for (unsigned long r = 2; r <= 64; ++r) {
        Int root;
        if (iroot_exact(m, r, root) && root > 1) {
          std::map<Int, long> sub;
          factor_into(root, mult, sub);
          for (auto& [p, e] : sub) push(p, e * (long)r);
          return;
        }
      }
      throw ConfigError("cannot factor base " + m.get_str());
    }
    push(m, mult);
  }
}

struct Log2Cache {
  std::mutex mu;
  // prime -> frac_bits -> enclosure of log2(prime)
  std::map<Int, std::map<unsigned, std::pair<Rat, Rat>>> entries;
};

Log2Cache& log2_cache() {
  static Log2Cache c;
  return c;
}

// Bit-recurrence enclosure of log2(p) for prime p: write p = 2^n0 * m with
// m in [1,2), square m repeatedly in fixed point with directed rounding and
// read off binary digits while both interval ends agree.
std::pair<Rat, Rat> log2_prime(const Int& p, unsigned frac_bits) {
  if (p == 2) return {Rat(1), Rat(1)};
  {
    std::lock_guard<std::mutex> lk(log2_cache().mu);
    auto it = log2_cache().entries.find(p);
    if (it != log2_cache().entries.end()) {
      auto jt = it->second.find(frac_bits);
      if (jt != it->second.end()) return jt->second;
    }
  }
  unsigned long n0 = bit_length(p) - 1;
  unsigned guard = 64;
  unsigned G = frac_bits + guard;
  Int one;
  mpz_ui_pow_ui(one.get_mpz_t(), 2, G);
  Int two = one * 2;
  Int lo = p, hi = p;
  // scale p / 2^{n0} into G-bit fixed point
  lo <<= (G - n0);
  hi = lo;
  Int bits = 0;
  unsigned done = 0;
  for (unsigned j = 0; j < frac_bits; ++j) {
    lo = (lo * lo) >> G;
    Int h2 = hi * hi;
    hi = h2 >> G;
    if ((h2 & (one - 1)) != 0) hi += 1;
    int bit;
    if (lo >= two && hi >= two) {
      bit = 1;
      lo >>= 1;
      Int r = hi & 1;
      hi = (hi >> 1) + r;
    } else if (lo < two && hi < two) {
      bit = 0;
    } else {
      break;
    }
    bits = bits * 2 + bit;
    ++done;
  }
  Int den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, done);
  Rat lo_r = Rat(n0) + frac(bits, den);
  Rat hi_r = Rat(n0) + frac(bits + 1, den);
  lo_r.canonicalize();
  hi_r.canonicalize();
  auto res = std::make_pair(lo_r, hi_r);
  std::lock_guard<std::mutex> lk(log2_cache().mu);
  log2_cache().entries[p][frac_bits] = res;
  return res;
}

}  // namespace

void PowerProduct::set(const Int& p, const Rat& e) {
  if (e == 0)
    f_.erase(p);
  else
    f_[p] = e;
}

PowerProduct PowerProduct::from_rational(const Rat& x) {
  if (x <= 0) throw ConfigError("power product value must be positive");
  std::map<Int, long> fs;
  factor_into(x.get_num(), 1, fs);
  factor_into(x.get_den(), -1, fs);
  PowerProduct r;
  for (auto& [p, e] : fs) r.set(p, Rat(e));
  return r;
}

PowerProduct PowerProduct::pow_of(const Rat& base, const Rat& exp) {
  return from_rational(base).pow(exp);
}

PowerProduct PowerProduct::operator*(const PowerProduct& o) const {
  PowerProduct r = *this;
  for (auto& [p, e] : o.f_) {
    auto it = r.f_.find(p);
    if (it == r.f_.end())
      r.f_[p] = e;
    else {
      it->second += e;
      if (it->second == 0) r.f_.erase(it);
    }
  }
  return r;
}

PowerProduct PowerProduct::inv() const { return pow(Rat(-1)); }

PowerProduct PowerProduct::operator/(const PowerProduct& o) const { return *this * o.inv(); }

PowerProduct PowerProduct::pow(const Rat& e) const {
  PowerProduct r;
  if (e == 0) return r;
  for (auto& [p, x] : f_) r.f_[p] = x * e;
  return r;
}

bool PowerProduct::is_rational() const {
  for (auto& [p, e] : f_)
    if (e.get_den() != 1) return false;
  return true;
}

void PowerProduct::cleared(Int& num, Int& den, unsigned long& L, std::size_t max_bits) const {
  Int l = 1;
  for (auto& [p, e] : f_) {
    Int d = e.get_den();
    Int g;
    mpz_gcd(g.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
    l = l / g * d;
    if (l > 1000000) throw BudgetExceeded("exponent denominators too large to clear");
  }
  L = l.get_ui();
  num = 1;
  den = 1;
  std::size_t bits = 0;
  for (auto& [p, e] : f_) {
    Rat le = e * Rat(l);
    Int g = le.get_num();  // integral after clearing
    bool neg = g < 0;
    Int ga = neg ? Int(-g) : g;
    if (!ga.fits_ulong_p()) throw BudgetExceeded("cleared exponent too large");
    bits += ga.get_ui() * bit_length(p);
    if (bits > max_bits) throw BudgetExceeded("cleared power too large to materialize");
    Int t;
    mpz_pow_ui(t.get_mpz_t(), p.get_mpz_t(), ga.get_ui());
    if (neg)
      den *= t;
    else
      num *= t;
  }
}

int PowerProduct::cmp(const PowerProduct& o) const {
  PowerProduct d = *this / o;
  if (d.f_.empty()) return 0;
  bool all_pos = true, all_neg = true;
  for (auto& [p, e] : d.f_) {
    if (e > 0) all_neg = false;
    if (e < 0) all_pos = false;
  }
  if (all_pos) return 1;
  if (all_neg) return -1;
  for (unsigned F : {128u, 512u, 2048u, 8192u, 32768u}) {
    Rat lo = 0, hi = 0;
    for (auto& [p, e] : d.f_) {
      auto [pl, ph] = log2_prime(p, F);
      if (e >= 0) {
        lo += e * pl;
        hi += e * ph;
      } else {
        lo += e * ph;
        hi += e * pl;
      }
    }
    if (lo > 0) return 1;
    if (hi < 0) return -1;
  }
  // interval still straddles zero: clear to integers and compare exactly
  Int num, den;
  unsigned long L;
  d.cleared(num, den, L, std::size_t(1) << 27);
  return ::cmp(num, den);
}

int PowerProduct::cmp(const Rat& x) const {
  if (x <= 0) return 1;
  return cmp(from_rational(x));
}

Rat PowerProduct::to_rational() const {
  if (!is_rational()) throw ConfigError("power product value is not rational");
  Int num, den;
  unsigned long L;
  cleared(num, den, L, std::size_t(1) << 27);
  Rat r(num, den);
  r.canonicalize();
  return r;
}

Int PowerProduct::floor() const {
  Int num, den;
  unsigned long L;
  cleared(num, den, L, std::size_t(1) << 27);
  // value = (num/den)^{1/L}; t = floor(value) iff t^L*den <= num < (t+1)^L*den
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  Int t = iroot_floor(q, L);
  auto le_value = [&](const Int& c) {
    Int cl;
    mpz_pow_ui(cl.get_mpz_t(), c.get_mpz_t(), L);
    return cl * den <= num;
  };
  while (le_value(t + 1)) t += 1;
  while (t > 0 && !le_value(t)) t -= 1;
  return t;
}

Int PowerProduct::ceil() const {
  Int f = floor();
  PowerProduct fv = f > 0 ? from_rational(Rat(f)) : PowerProduct();
  if (f > 0 && cmp(fv) == 0) return f;
  return f + 1;
}

std::pair<Rat, Rat> PowerProduct::log2_range(unsigned frac_bits) const {
  Rat lo = 0, hi = 0;
  for (auto& [p, e] : f_) {
    auto [pl, ph] = log2_prime(p, frac_bits);
    if (e >= 0) {
      lo += e * pl;
      hi += e * ph;
    } else {
      lo += e * ph;
      hi += e * pl;
    }
  }
  return {lo, hi};
}

double PowerProduct::approx() const {
  auto [lo, hi] = log2_range(64);
  return std::exp2((lo.get_d() + hi.get_d()) / 2);
}

std::string PowerProduct::str() const {
  if (f_.empty()) return "1";
  std::ostringstream os;
  bool first = true;
  for (auto& [p, e] : f_) {
    if (!first) os << " * ";
    first = false;
    os << p.get_str();
    if (e != 1) os << "^(" << rat_str(e) << ")";
  }
  return os.str();
}

}  // namespace exactdim
