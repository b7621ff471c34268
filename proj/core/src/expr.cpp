#include "varcomp/expr.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace varcomp {

namespace {

using TermMap = std::map<Monomial, Rational>;

Expr from_map(TermMap&& map) {
  std::vector<Term> terms;
  terms.reserve(map.size());
  for (auto& [mono, coeff] : map) {
    if (coeff != 0) terms.push_back({mono, std::move(coeff)});
  }
  return Expr::from_terms(std::move(terms));
}

}  // namespace

Expr::Expr(const Rational& c) {
  if (c != 0) terms_.push_back({{}, c});
}

Expr::Expr(int c) : Expr(Rational(c)) {}

Expr Expr::symbol(const Symbol& s, int exponent) {
  Expr e;
  if (exponent == 0) return Expr(1);
  e.terms_.push_back({{Factor{s, exponent}}, Rational(1)});
  return e;
}

Expr Expr::from_terms(std::vector<Term> terms) {
  // Fast path: callers that already produce sorted, merged terms.
  bool canonical = true;
  for (std::size_t k = 0; k < terms.size() && canonical; ++k) {
    if (terms[k].coeff == 0) canonical = false;
    if (k > 0 && !(terms[k - 1].monomial < terms[k].monomial)) canonical = false;
    const auto& mono = terms[k].monomial;
    for (std::size_t f = 0; f < mono.size() && canonical; ++f) {
      if (mono[f].exponent == 0) canonical = false;
      if (f > 0 && !(mono[f - 1].symbol < mono[f].symbol)) canonical = false;
    }
  }
  Expr e;
  if (canonical) {
    e.terms_ = std::move(terms);
    return e;
  }
  TermMap map;
  for (auto& t : terms) {
    // merge repeated symbols inside the monomial
    std::map<Symbol, int> powers;
    for (const auto& f : t.monomial) powers[f.symbol] += f.exponent;
    Monomial mono;
    for (auto& [sym, exp] : powers) {
      if (exp != 0) mono.push_back({sym, exp});
    }
    map[std::move(mono)] += t.coeff;
  }
  for (auto& [mono, coeff] : map) {
    if (coeff != 0) e.terms_.push_back({mono, std::move(coeff)});
  }
  return e;
}

std::optional<Rational> Expr::constant_value() const {
  if (terms_.empty()) return Rational(0);
  if (terms_.size() == 1 && terms_[0].monomial.empty()) return terms_[0].coeff;
  return std::nullopt;
}

std::vector<Symbol> Expr::symbols() const {
  std::set<Symbol> seen;
  for (const auto& t : terms_) {
    for (const auto& f : t.monomial) seen.insert(f.symbol);
  }
  return {seen.begin(), seen.end()};
}

Expr Expr::operator-() const {
  Expr out = *this;
  for (auto& t : out.terms_) t.coeff = -t.coeff;
  return out;
}

Expr& Expr::operator+=(const Expr& rhs) {
  if (rhs.terms_.empty()) return *this;
  std::vector<Term> merged;
  merged.reserve(terms_.size() + rhs.terms_.size());
  auto a = terms_.begin();
  auto b = rhs.terms_.begin();
  while (a != terms_.end() || b != rhs.terms_.end()) {
    if (b == rhs.terms_.end() || (a != terms_.end() && a->monomial < b->monomial)) {
      merged.push_back(std::move(*a++));
    } else if (a == terms_.end() || b->monomial < a->monomial) {
      merged.push_back(*b++);
    } else {
      Rational c = a->coeff + b->coeff;
      if (c != 0) merged.push_back({std::move(a->monomial), std::move(c)});
      ++a;
      ++b;
    }
  }
  terms_ = std::move(merged);
  return *this;
}

Expr& Expr::operator-=(const Expr& rhs) { return *this += -rhs; }

Monomial multiply_monomials(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() || j != b.end()) {
    if (j == b.end() || (i != a.end() && i->symbol < j->symbol)) {
      out.push_back(*i++);
    } else if (i == a.end() || j->symbol < i->symbol) {
      out.push_back(*j++);
    } else {
      int exp = i->exponent + j->exponent;
      if (exp != 0) out.push_back({i->symbol, exp});
      ++i;
      ++j;
    }
  }
  return out;
}

Expr& Expr::operator*=(const Expr& rhs) {
  if (terms_.empty() || rhs.terms_.empty()) {
    terms_.clear();
    return *this;
  }
  TermMap map;
  for (const auto& x : terms_) {
    for (const auto& y : rhs.terms_) {
      map[multiply_monomials(x.monomial, y.monomial)] += x.coeff * y.coeff;
    }
  }
  *this = from_map(std::move(map));
  return *this;
}

Expr Expr::pow(int exponent) const {
  if (exponent == 0) return Expr(1);
  if (terms_.empty()) {
    if (exponent < 0) throw std::domain_error("negative power of zero");
    return Expr();
  }
  if (terms_.size() == 1) {
    const auto& t = terms_[0];
    Rational c = 1;
    const Rational base = exponent > 0 ? t.coeff : Rational(1) / t.coeff;
    for (int k = 0; k < std::abs(exponent); ++k) c *= base;
    Monomial mono = t.monomial;
    for (auto& f : mono) f.exponent *= exponent;
    Expr e;
    e.terms_.push_back({std::move(mono), c});
    return e;
  }
  if (exponent < 0) throw std::domain_error("negative power of a sum is not a polynomial");
  Expr result(1);
  Expr base = *this;
  int k = exponent;
  while (k > 0) {
    if (k & 1) result *= base;
    k >>= 1;
    if (k > 0) base *= base;
  }
  return result;
}

Expr Expr::scaled(const Rational& c) const {
  if (c == 0) return Expr();
  Expr out = *this;
  for (auto& t : out.terms_) t.coeff *= c;
  return out;
}

Expr normalize(const Expr& e) {
  // Shuffle through the slow path of from_terms so the canonical form is rebuilt.
  std::vector<Term> terms(e.terms().rbegin(), e.terms().rend());
  TermMap map;
  for (auto& t : terms) map[t.monomial] += t.coeff;
  return from_map(std::move(map));
}

std::string to_string(const Rational& r) {
  const auto num = boost::multiprecision::numerator(r);
  const auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace varcomp
