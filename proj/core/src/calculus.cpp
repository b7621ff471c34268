#include "varcomp/calculus.hpp"

#include <algorithm>
#include <map>

#include "varcomp/errors.hpp"

namespace varcomp {

namespace {

const AtomDecl& atom_of(const JetSpec& spec, const Symbol& s) {
  return spec.atoms().at(static_cast<std::size_t>(s.id));
}

/// ∂(atom)/∂var via the atom's rule, or zero when the atom does not read var.
Expr atom_partial(const Symbol& atom, const Symbol& var, const JetSpec& spec) {
  if (!spec.atom_depends_on(atom.id, var)) return Expr();
  const auto& decl = atom_of(spec, atom);
  std::optional<Expr> rule;
  if (decl.derivative) rule = decl.derivative(atom.indices, var);
  if (!rule) throw MissingDerivativeRule(spec.symbol_name(atom), spec.symbol_name(var));
  return *rule;
}

Monomial with_exponent_shift(const Monomial& mono, std::size_t pos) {
  Monomial out = mono;
  if (--out[pos].exponent == 0) out.erase(out.begin() + static_cast<std::ptrdiff_t>(pos));
  return out;
}

void accumulate(std::map<Monomial, Rational>& acc, const Expr& e) {
  for (const auto& t : e.terms()) acc[t.monomial] += t.coeff;
}

Expr from_acc(std::map<Monomial, Rational>& acc) {
  std::vector<Term> terms;
  for (auto& [mono, coeff] : acc) {
    if (coeff != 0) terms.push_back({mono, coeff});
  }
  return Expr::from_terms(std::move(terms));
}

}  // namespace

int jet_order(const Expr& e, const JetSpec& spec) {
  int order = 0;
  for (const auto& t : e.terms()) {
    for (const auto& f : t.monomial) {
      if (f.symbol.kind == SymbolKind::Field) {
        order = std::max(order, f.symbol.order());
      } else if (f.symbol.kind == SymbolKind::Atom && !atom_of(spec, f.symbol).depends.empty()) {
        order = std::max(order, atom_of(spec, f.symbol).order);
      }
    }
  }
  return order;
}

Expr partial(const Expr& e, const Symbol& var, const JetSpec& spec) {
  std::map<Monomial, Rational> acc;
  for (const auto& t : e.terms()) {
    for (std::size_t k = 0; k < t.monomial.size(); ++k) {
      const Factor& f = t.monomial[k];
      if (f.symbol == var) {
        acc[with_exponent_shift(t.monomial, k)] += t.coeff * f.exponent;
      } else if (f.symbol.kind == SymbolKind::Atom) {
        Expr d = atom_partial(f.symbol, var, spec);
        if (d.is_zero()) continue;
        Expr rest = Expr::from_terms({Term{with_exponent_shift(t.monomial, k), t.coeff * f.exponent}});
        accumulate(acc, rest * d);
      }
    }
  }
  return from_acc(acc);
}

Expr total_derivative(const Expr& e, int base_index, const JetSpec& spec) {
  if (base_index < 0 || base_index >= spec.base_dim()) throw SemanticError("base index out of range");
  const int cap = spec.coordinate_cap();
  std::map<Monomial, Rational> acc;
  for (const auto& t : e.terms()) {
    for (std::size_t k = 0; k < t.monomial.size(); ++k) {
      const Factor& f = t.monomial[k];
      const Rational c = t.coeff * f.exponent;
      switch (f.symbol.kind) {
        case SymbolKind::Param:
          break;
        case SymbolKind::Base:
          if (f.symbol.id == base_index) acc[with_exponent_shift(t.monomial, k)] += c;
          break;
        case SymbolKind::Field: {
          if (f.symbol.order() + 1 > cap) {
            throw OrderOverflow("total derivative of " + spec.symbol_name(f.symbol) + " exceeds jet order " +
                                std::to_string(cap));
          }
          Symbol next = Symbol::jet(f.symbol.id, f.symbol.multi_index().with(base_index));
          Monomial mono = multiply_monomials(with_exponent_shift(t.monomial, k), {Factor{next, 1}});
          acc[mono] += c;
          break;
        }
        case SymbolKind::Atom: {
          const auto& decl = atom_of(spec, f.symbol);
          if (decl.depends.empty()) break;
          if (decl.order + 1 > cap) throw OrderOverflow("total derivative of atom exceeds jet order");
          Expr rest = Expr::from_terms({Term{with_exponent_shift(t.monomial, k), c}});
          for (int comp : spec.components_of(decl.depends)) {
            for (int q = 0; q <= decl.order; ++q) {
              for (const auto& J : multi_indices_of_order(spec.base_dim(), q)) {
                const Symbol var = Symbol::jet(comp, J);
                Expr d = atom_partial(f.symbol, var, spec);
                if (d.is_zero()) continue;
                accumulate(acc, rest * d * Expr::symbol(Symbol::jet(comp, J.with(base_index))));
              }
            }
          }
          break;
        }
      }
    }
  }
  return from_acc(acc);
}

Expr total_derivative(const Expr& e, const MultiIndex& K, const JetSpec& spec) {
  Expr out = e;
  for (int i : K.indices()) {
    if (out.is_zero()) break;
    out = total_derivative(out, i, spec);
  }
  return out;
}

std::vector<WeightedComponent> homogeneous_decompose(const Expr& e, const std::vector<int>& scaled_fields,
                                                     const JetSpec& spec) {
  auto scaled = [&](int field) {
    return std::find(scaled_fields.begin(), scaled_fields.end(), field) != scaled_fields.end();
  };
  std::map<Rational, std::vector<Term>> groups;
  for (const auto& t : e.terms()) {
    Rational w = 0;
    for (const auto& f : t.monomial) {
      if (f.symbol.kind == SymbolKind::Field) {
        if (scaled(spec.components().at(static_cast<std::size_t>(f.symbol.id)).field)) w += f.exponent;
      } else if (f.symbol.kind == SymbolKind::Atom) {
        const auto& decl = atom_of(spec, f.symbol);
        const bool reads_scaled = std::any_of(decl.depends.begin(), decl.depends.end(), scaled);
        if (!reads_scaled) continue;
        if (!decl.weight) throw UnknownWeight(decl.name);
        w += *decl.weight * f.exponent;
      }
    }
    groups[w].push_back(t);
  }
  std::vector<WeightedComponent> out;
  for (auto& [w, terms] : groups) out.push_back({w, Expr::from_terms(std::move(terms))});
  return out;
}

}  // namespace varcomp
