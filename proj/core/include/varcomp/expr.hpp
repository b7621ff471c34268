#pragma once

#include <optional>
#include <string>
#include <vector>

#include "varcomp/symbol.hpp"

namespace varcomp {

struct Factor {
  Symbol symbol;
  int exponent = 1;

  auto operator<=>(const Factor&) const = default;
  bool operator==(const Factor&) const = default;
};

/// Product of symbol powers, sorted by symbol, no zero exponents.
using Monomial = std::vector<Factor>;

struct Term {
  Monomial monomial;
  Rational coeff;

  bool operator==(const Term&) const = default;
};

/// Immutable symbolic expression in canonical form: a sum of monomials with
/// merged, nonzero rational coefficients, ordered by monomial. Two
/// expressions are equal iff their canonical forms are structurally equal.
///
/// Integer powers of single monomials may be negative (Laurent monomials);
/// powers of sums are expanded.
class Expr {
 public:
  Expr() = default;
  Expr(const Rational& c);  // NOLINT(google-explicit-constructor)
  Expr(int c);              // NOLINT(google-explicit-constructor)

  static Expr symbol(const Symbol& s, int exponent = 1);
  /// Canonicalizes an arbitrary list of terms (merges duplicates, drops zeros).
  static Expr from_terms(std::vector<Term> terms);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  std::optional<Rational> constant_value() const;
  /// Symbols occurring anywhere in the expression, sorted.
  std::vector<Symbol> symbols() const;

  Expr operator-() const;
  Expr& operator+=(const Expr& rhs);
  Expr& operator-=(const Expr& rhs);
  Expr& operator*=(const Expr& rhs);
  friend Expr operator+(Expr lhs, const Expr& rhs) { return lhs += rhs; }
  friend Expr operator-(Expr lhs, const Expr& rhs) { return lhs -= rhs; }
  friend Expr operator*(Expr lhs, const Expr& rhs) { return lhs *= rhs; }

  /// Throws std::domain_error for a negative power of a multi-term expression.
  Expr pow(int exponent) const;
  Expr scaled(const Rational& c) const;

  bool operator==(const Expr&) const = default;

 private:
  std::vector<Term> terms_;
};

/// Rebuilds the canonical form from scratch; the identity on any Expr.
Expr normalize(const Expr& e);

Monomial multiply_monomials(const Monomial& a, const Monomial& b);

std::string to_string(const Rational& r);

}  // namespace varcomp
