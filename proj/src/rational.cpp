#include "exactdim/rational.hpp"

#include <cctype>

namespace exactdim {

Rat parse_rat(const std::string& s) {
  if (s.empty()) throw ConfigError("empty rational literal");
  for (char c : s) {
    if (!(std::isdigit((unsigned char)c) || c == '-' || c == '+' || c == '/' || c == '.'))
      throw ConfigError("bad character in rational literal: '" + s + "'");
  }
  auto slash = s.find('/');
  auto dot = s.find('.');
  if (slash != std::string::npos && dot != std::string::npos)
    throw ConfigError("rational literal mixes '/' and '.': '" + s + "'");
  try {
    if (dot != std::string::npos) {
      // finite decimal: sign + integer part + fraction digits
      std::string head = s.substr(0, dot), tail = s.substr(dot + 1);
      if (tail.empty()) throw ConfigError("trailing '.' in '" + s + "'");
      bool neg = !head.empty() && head[0] == '-';
      if (!head.empty() && (head[0] == '-' || head[0] == '+')) head = head.substr(1);
      if (head.empty()) head = "0";
      Int num(head);
      Int den = 1;
      for (char c : tail) {
        if (!std::isdigit((unsigned char)c)) throw ConfigError("bad decimal '" + s + "'");
        num = num * 10 + (c - '0');
        den *= 10;
      }
      Rat r(num, den);
      r.canonicalize();
      return neg ? Rat(-r) : r;
    }
    Rat r(s);
    if (r.get_den() == 0) throw ConfigError("zero denominator in '" + s + "'");
    r.canonicalize();
    return r;
  } catch (const std::invalid_argument&) {
    throw ConfigError("unparsable rational '" + s + "'");
  }
}

Rat frac(const Int& num, const Int& den) {
  if (den == 0) throw ConfigError("zero denominator");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

std::string rat_str(const Rat& x) {
  Rat c = x;
  c.canonicalize();
  if (c.get_den() == 1) return c.get_num().get_str();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

Vec parse_rat_list(const std::string& csv) {
  Vec out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    auto comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    out.push_back(parse_rat(csv.substr(pos, comma - pos)));
    pos = comma + 1;
    if (comma == csv.size()) break;
  }
  return out;
}

Rat rat_pow(const Rat& x, long e) {
  if (e == 0) return Rat(1);
  bool inv = e < 0;
  unsigned long m = inv ? (unsigned long)(-e) : (unsigned long)e;
  if (inv && x == 0) throw ConfigError("zero to a negative power");
  Rat r;
  mpz_pow_ui(r.get_num_mpz_t(), x.get_num_mpz_t(), m);
  mpz_pow_ui(r.get_den_mpz_t(), x.get_den_mpz_t(), m);
  if (inv) return Rat(1) / r;
  return r;
}

Int rat_floor(const Rat& x) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

Int rat_ceil(const Rat& x) {
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

Int iroot_floor(const Int& a, unsigned long r) {
  if (a < 0) throw ConfigError("root of a negative integer");
  Int root;
  mpz_root(root.get_mpz_t(), a.get_mpz_t(), r);
  return root;
}

bool iroot_exact(const Int& a, unsigned long r, Int& root) {
  if (a < 0) return false;
  return mpz_root(root.get_mpz_t(), a.get_mpz_t(), r) != 0;
}

Int factorial(unsigned n) {
  Int f;
  mpz_fac_ui(f.get_mpz_t(), n);
  return f;
}

Int nearest_int(const Rat& x) {
  // floor(x + 1/2), so a tie x = m + 1/2 rounds up to m + 1; the comparison
  // helpers that matter treat both tie choices identically (equal distance).
  return rat_floor(x + Rat(1, 2));
}

Rat int_dist(const Rat& x) {
  Rat d = x - Rat(rat_floor(x));
  return d <= Rat(1, 2) ? d : Rat(1) - d;
}

std::size_t bit_length(const Int& a) { return mpz_sizeinbase(a.get_mpz_t(), 2); }

}  // namespace exactdim
