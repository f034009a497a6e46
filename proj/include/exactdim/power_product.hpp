#pragma once

#include <map>
#include <string>
#include <utility>

#include "exactdim/rational.hpp"

namespace exactdim {

// Exact positive real of the form prod_p p^{e_p} with prime bases and
// rational exponents. Values are canonical: unique factorization makes the
// exponent map a faithful representation, so equality is symbolic and every
// comparison of distinct values is decidable (sum of e_p*log2(p) vanishes
// only when all exponents do).
class PowerProduct {
 public:
  PowerProduct() = default;  // value 1

  static PowerProduct from_rational(const Rat& x);             // x > 0
  static PowerProduct pow_of(const Rat& base, const Rat& exp); // base > 0

  PowerProduct operator*(const PowerProduct& o) const;
  PowerProduct operator/(const PowerProduct& o) const;
  PowerProduct pow(const Rat& e) const;
  PowerProduct inv() const;

  // Sign of (*this - o): -1, 0, +1. Exact.
  int cmp(const PowerProduct& o) const;
  int cmp(const Rat& x) const;

  bool is_one() const { return f_.empty(); }
  // All exponents integral, i.e. the value is rational.
  bool is_rational() const;
  // Requires is_rational(); guarded against huge results.
  Rat to_rational() const;
  // Exact floor of the value; guarded against huge results.
  Int floor() const;
  Int ceil() const;

  // Enclosure of log2(value) with exact rational endpoints; width shrinks
  // as frac_bits grows.
  std::pair<Rat, Rat> log2_range(unsigned frac_bits = 128) const;
  double approx() const;  // non-rigorous double estimate

  const std::map<Int, Rat>& factors() const { return f_; }
  std::string str() const;

 private:
  std::map<Int, Rat> f_;
  void set(const Int& p, const Rat& e);
  // Clears exponents to a common integer power: value^L = num/den.
  void cleared(Int& num, Int& den, unsigned long& L, std::size_t max_bits) const;
};

inline PowerProduct pp(const Rat& x) { return PowerProduct::from_rational(x); }
inline PowerProduct pp_pow(const Rat& base, const Rat& exp) { return PowerProduct::pow_of(base, exp); }

}  // namespace exactdim
