#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace exactdim {

using Int = mpz_class;
using Rat = mpq_class;
using Vec = std::vector<Rat>;

// Raised on malformed inputs and violated preconditions (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an enumeration or comparison exceeds its work budget.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a hypothesis that an operation was promised fails on the given
// data; the message carries a concrete witness.
struct PreconditionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Work meter shared by enumeration loops. charge() is called once per unit
// of elementary work (candidate tested, box emitted, lattice point visited).
struct Budget {
  std::uint64_t limit = 100000000;
  std::uint64_t used = 0;
  void charge(std::uint64_t n = 1) {
    used += n;
    if (used > limit) throw BudgetExceeded("work budget exceeded (" + std::to_string(limit) + ")");
  }
};

// Parses "p/q", "p", or a finite decimal like "-0.125" into an exact rational.
Rat parse_rat(const std::string& s);

// canonical num/den; throws ConfigError when den == 0
Rat frac(const Int& num, const Int& den);

// Canonical text form: "p/q", or "p" when the denominator is 1.
std::string rat_str(const Rat& x);

Vec parse_rat_list(const std::string& csv);

inline Rat rat_abs(const Rat& x) { return x < 0 ? Rat(-x) : x; }

// x^e for integer e (e < 0 requires x != 0).
Rat rat_pow(const Rat& x, long e);

// Largest integer <= x, smallest integer >= x.
Int rat_floor(const Rat& x);
Int rat_ceil(const Rat& x);

// Floor of the r-th root of a >= 0.
Int iroot_floor(const Int& a, unsigned long r);

// True iff a is an exact r-th power; root receives the r-th root when so.
bool iroot_exact(const Int& a, unsigned long r, Int& root);

Int factorial(unsigned n);

// Nearest integer to x with ties broken toward +infinity.
Int nearest_int(const Rat& x);

// Distance from x to the nearest integer.
Rat int_dist(const Rat& x);

inline int sgn(const Rat& x) { return sgn(x.get_num()); }

std::size_t bit_length(const Int& a);

}  // namespace exactdim
