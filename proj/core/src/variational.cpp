#include "varcomp/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "varcomp/errors.hpp"

namespace varcomp {

namespace {

Rational binomial(int n, int k) {
  Rational r = 1;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

std::vector<int> resolve_fields(const JetSpec& spec, const std::vector<int>& scaled_fields) {
  return scaled_fields.empty() ? spec.all_field_ids() : scaled_fields;
}

bool has_atoms(const Expr& e) {
  for (const auto& t : e.terms()) {
    for (const auto& f : t.monomial) {
      if (f.symbol.kind == SymbolKind::Atom) return true;
    }
  }
  return false;
}

void require_same_spec(const SourceForm& a, const SourceForm& b) {
  if (a.components.size() != b.components.size()) throw Error("source forms have different component counts");
}

}  // namespace

// ---------------------------------------------------------------- containers

int SourceForm::order() const {
  int r = 0;
  for (const auto& c : components) r = std::max(r, jet_order(c, *spec));
  return r;
}

bool SourceForm::is_zero() const {
  return std::all_of(components.begin(), components.end(), [](const Expr& e) { return e.is_zero(); });
}

SourceForm operator+(const SourceForm& a, const SourceForm& b) {
  require_same_spec(a, b);
  SourceForm out{a.spec, a.components};
  for (std::size_t k = 0; k < out.components.size(); ++k) out.components[k] += b.components[k];
  if (b.spec && b.spec->coordinate_cap() > out.spec->coordinate_cap()) out.spec = b.spec;
  return out;
}

SourceForm operator-(const SourceForm& a, const SourceForm& b) {
  require_same_spec(a, b);
  SourceForm out{a.spec, a.components};
  for (std::size_t k = 0; k < out.components.size(); ++k) out.components[k] -= b.components[k];
  if (b.spec && b.spec->coordinate_cap() > out.spec->coordinate_cap()) out.spec = b.spec;
  return out;
}

bool operator==(const SourceForm& a, const SourceForm& b) { return a.components == b.components; }

int Lagrangian::order() const { return jet_order(density, *spec); }

Expr HelmholtzTensor::entry(int sigma, int nu, const MultiIndex& J) const {
  auto it = entries.find({sigma, nu, J});
  return it == entries.end() ? Expr() : it->second;
}

std::shared_ptr<const JetSpec> spec_with_cap(const std::shared_ptr<const JetSpec>& spec, int needed) {
  if (spec->coordinate_cap() >= needed) return spec;
  return std::make_shared<const JetSpec>(spec->promoted((needed + 1) / 2));
}

// ---------------------------------------------------------------- operators

SourceForm euler_lagrange(const Lagrangian& lambda) {
  const int s = lambda.order();
  auto spec = spec_with_cap(lambda.spec, 2 * s);
  const auto multis = multi_indices_up_to(spec->base_dim(), s);
  SourceForm out{spec, {}};
  for (int sigma = 0; sigma < spec->component_count(); ++sigma) {
    Expr E;
    for (const auto& K : multis) {
      Expr p = partial(lambda.density, Symbol::jet(sigma, K), *spec);
      if (p.is_zero()) continue;
      Expr term = total_derivative(p, K, *spec);
      if (K.order() % 2 == 0) {
        E += term;
      } else {
        E -= term;
      }
    }
    out.components.push_back(std::move(E));
  }
  return out;
}

HelmholtzTensor helmholtz(const SourceForm& eps) {
  const int r = eps.order();
  auto spec = spec_with_cap(eps.spec, 2 * r);
  const int n = spec->base_dim();
  const int m = spec->component_count();

  // P[(var component, M)][source component] = ∂ε_source/∂y^var_M
  std::map<std::pair<int, MultiIndex>, std::vector<Expr>> partials;
  auto P = [&](int var, const MultiIndex& M, int source) -> const Expr& {
    auto key = std::make_pair(var, M);
    auto it = partials.find(key);
    if (it == partials.end()) {
      std::vector<Expr> row;
      row.reserve(static_cast<std::size_t>(m));
      for (const auto& c : eps.components) row.push_back(partial(c, Symbol::jet(var, M), *spec));
      it = partials.emplace(std::move(key), std::move(row)).first;
    }
    return it->second[static_cast<std::size_t>(source)];
  };

  HelmholtzTensor out{spec, r, {}};
  for (const auto& J : multi_indices_up_to(n, r)) {
    const int k = static_cast<int>(J.order());
    for (int sigma = 0; sigma < m; ++sigma) {
      for (int nu = 0; nu < m; ++nu) {
        Expr H = P(nu, J, sigma);
        if (k % 2 == 0) {
          H -= P(sigma, J, nu);
        } else {
          H += P(sigma, J, nu);
        }
        for (int l = k + 1; l <= r; ++l) {
          const Rational sign = (l % 2 == 0) ? 1 : -1;
          const Rational c = binomial(l, k);
          for (const auto& Kp : multi_indices_of_order(n, l - k)) {
            const MultiIndex M = J.merged(Kp);
            const Expr& base = P(sigma, M, nu);
            if (base.is_zero()) continue;
            const Rational mult = Rational(J.orderings()) * Rational(Kp.orderings()) / Rational(M.orderings());
            H -= total_derivative(base, Kp, *spec).scaled(sign * c * mult);
          }
        }
        if (!H.is_zero()) out.entries.emplace(HelmholtzIndex{sigma, nu, J}, std::move(H));
      }
    }
  }
  return out;
}

Lagrangian vt_lagrangian(const SourceForm& eps, const std::vector<int>& scaled_fields) {
  const auto& spec = *eps.spec;
  const auto fields = resolve_fields(spec, scaled_fields);
  Expr L;
  for (int sigma : spec.components_of(fields)) {
    const Expr& component = eps.components.at(static_cast<std::size_t>(sigma));
    Expr integral;
    for (const auto& part : homogeneous_decompose(component, fields, spec)) {
      if (part.weight == -1) {
        throw DivergentHomotopy("component " + spec.component_name(sigma) +
                                    " has a part of homothety weight -1; the homotopy integral diverges",
                                -1.0);
      }
      integral += part.component.scaled(Rational(1) / (part.weight + 1));
    }
    L += spec.coord(sigma) * integral;
  }
  return Lagrangian{eps.spec, std::move(L)};
}

SourceForm canonical_completion(const SourceForm& eps, const std::vector<int>& scaled_fields) {
  return euler_lagrange(vt_lagrangian(eps, scaled_fields)) - eps;
}

SourceForm completion_via_helmholtz(const SourceForm& eps) {
  const HelmholtzTensor H = helmholtz(eps);
  const auto& spec = *H.spec;
  const auto fields = spec.all_field_ids();
  SourceForm out{H.spec, std::vector<Expr>(static_cast<std::size_t>(spec.component_count()))};
  for (const auto& [key, coeff] : H.entries) {
    // H_{νσ}^J with ν = key.sigma contributes to τ_ν through y^σ_J, σ = key.nu.
    Expr integral;
    for (const auto& part : homogeneous_decompose(coeff, fields, spec)) {
      if (part.weight == -2) {
        throw DivergentHomotopy("Helmholtz coefficient has a part of homothety weight -2; the integral diverges",
                                -2.0);
      }
      integral += part.component.scaled(Rational(1) / (part.weight + 2));
    }
    out.components[static_cast<std::size_t>(key.sigma)] -= spec.coord(key.nu, key.J) * integral;
  }
  return out;
}

Lagrangian reduce_order(const Lagrangian& lambda) {
  const auto& spec = *lambda.spec;
  Expr L = lambda.density;
  int s = jet_order(L, spec);
  while (s > 0) {
    Expr rest_terms;
    Expr replaced;
    bool changed = false;
    for (const auto& t : L.terms()) {
      std::optional<std::size_t> top;
      bool eligible = true;
      int rest_order = 0;
      for (std::size_t k = 0; k < t.monomial.size(); ++k) {
        const auto& f = t.monomial[k];
        if (f.symbol.kind == SymbolKind::Atom) {
          eligible = false;
          break;
        }
        if (f.symbol.kind != SymbolKind::Field) continue;
        if (f.symbol.order() == s) {
          if (top || f.exponent != 1) {
            eligible = false;
            break;
          }
          top = k;
        } else {
          rest_order = std::max(rest_order, f.symbol.order());
        }
      }
      if (!eligible || !top || rest_order > s - 2) {
        rest_terms += Expr::from_terms({t});
        continue;
      }
      Monomial rest = t.monomial;
      const Symbol y = rest[*top].symbol;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(*top));
      const Expr G = Expr::from_terms({Term{rest, t.coeff}});
      std::vector<int> idx = y.indices;
      const int i = idx.back();
      idx.pop_back();
      // G y_{K∪i} = d_i(G y_K) − d_i(G) y_K
      replaced -= total_derivative(G, i, spec) * spec.coord(y.id, MultiIndex(idx));
      changed = true;
    }
    if (!changed) break;
    L = rest_terms + replaced;
    const int next = jet_order(L, spec);
    if (next >= s) break;
    s = next;
  }
  return Lagrangian{lambda.spec, std::move(L)};
}

// ---------------------------------------------------------------- zero testing

ZeroTest zero_test(const std::vector<Expr>& exprs, const JetSpec& spec, const ZeroTestOptions& opts) {
  std::vector<Expr> numeric;
  for (const auto& e : exprs) {
    if (e.is_zero()) continue;
    if (!has_atoms(e)) return ZeroTest{false, VerdictPath::Symbolic, std::numeric_limits<double>::infinity()};
    numeric.push_back(e);
  }
  if (numeric.empty()) return ZeroTest{};

  int order = 0;
  for (const auto& e : numeric) order = std::max(order, jet_order(e, spec));
  auto layout = std::make_shared<const JetLayout>(spec.base_dim(), spec.component_count(), order);
  const auto params = parameter_symbols(numeric);
  std::mt19937_64 rng(opts.seed);
  ZeroTest out{true, VerdictPath::Numeric, 0.0};
  for (int k = 0; k < opts.points; ++k) {
    JetPoint p = opts.sampler ? opts.sampler(rng) : random_jet_point(layout, rng, params);
    if (p.order() < order) p = p.relaid(layout);
    for (const auto& s : params) {
      if (!p.has_constant(s)) p.set(s, std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
    }
    for (const auto& e : numeric) {
      const double v = std::abs(eval(e, p, spec));
      out.max_residual = std::max(out.max_residual, std::isfinite(v) ? v : std::numeric_limits<double>::infinity());
    }
  }
  out.zero = out.max_residual < opts.tolerance;
  return out;
}

Verdict decide_variational(const HelmholtzTensor& h, const ZeroTestOptions& opts) {
  std::vector<Expr> exprs;
  exprs.reserve(h.entries.size());
  for (const auto& [key, e] : h.entries) exprs.push_back(e);
  const ZeroTest z = zero_test(exprs, *h.spec, opts);
  return Verdict{z.zero, z.path, z.max_residual};
}

}  // namespace varcomp
