#include "varcomp/render.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace varcomp {

namespace {

std::string one_based(const std::vector<int>& idx, const char* sep) {
  std::string out;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k) out += sep;
    out += std::to_string(idx[k] + 1);
  }
  return out;
}

std::string plain_factor(const Factor& f, const JetSpec& spec) {
  std::string s = spec.symbol_name(f.symbol);
  if (f.exponent == 1) return s;
  if (f.exponent > 0) return s + "^" + std::to_string(f.exponent);
  return s + "^(" + std::to_string(f.exponent) + ")";
}

std::string latex_rational(const Rational& c) {
  if (denominator(c) == 1) return to_string(c);
  return "\\frac{" + numerator(c).str() + "}{" + denominator(c).str() + "}";
}

std::string with_power(const std::string& s, int exponent) {
  if (exponent == 1) return s;
  const bool has_sup = s.find('^') != std::string::npos;
  const std::string base = has_sup ? "(" + s + ")" : s;
  return base + "^{" + std::to_string(exponent) + "}";
}

/// Sign-aware join of rendered terms.
struct TermWriter {
  std::string out;
  void add(bool negative, const std::string& body) {
    if (out.empty()) {
      out = negative ? "-" + body : body;
    } else {
      out += negative ? " - " : " + ";
      out += body;
    }
  }
};

std::string dot_accent(const std::string& name, int order) {
  switch (order) {
    case 0:
      return name;
    case 1:
      return "\\dot{" + name + "}";
    case 2:
      return "\\ddot{" + name + "}";
    case 3:
      return "\\dddot{" + name + "}";
    default:
      return name + "^{(" + std::to_string(order) + ")}";
  }
}

/// LaTeX of a field coordinate whose component indices are given as strings.
std::string latex_field(const JetSpec& spec, const FieldDecl& decl, const std::vector<std::string>& comp,
                        const std::vector<int>& J) {
  const std::string name = latex_name(decl.name);
  std::string joined;
  for (const auto& c : comp) joined += c;
  const bool upper = decl.shape.size() == 1;
  if (spec.base_dim() == 1) {
    std::string out = dot_accent(name, static_cast<int>(J.size()));
    if (comp.empty()) return out;
    if (J.size() > 3) out = "{" + out + "}";
    return out + (upper ? "^{" : "_{") + joined + "}";
  }
  std::string deriv;
  for (std::size_t k = 0; k < J.size(); ++k) {
    deriv += (k ? " " : "") + latex_name(spec.bases()[static_cast<std::size_t>(J[k])]);
  }
  if (comp.empty()) return J.empty() ? name : name + "_{," + deriv + "}";
  if (upper) return name + "^{" + joined + "}" + (J.empty() ? "" : "_{," + deriv + "}");
  return name + "_{" + joined + (J.empty() ? "" : "," + deriv) + "}";
}

std::string latex_symbol(const Symbol& s, const JetSpec& spec) {
  switch (s.kind) {
    case SymbolKind::Base:
      return latex_name(spec.bases().at(static_cast<std::size_t>(s.id)));
    case SymbolKind::Param: {
      const std::string name = latex_name(spec.params().at(static_cast<std::size_t>(s.id)).name);
      return s.indices.empty() ? name : name + "_{" + one_based(s.indices, "") + "}";
    }
    case SymbolKind::Atom: {
      const std::string name = latex_name(spec.atoms().at(static_cast<std::size_t>(s.id)).name);
      return s.indices.empty() ? name : name + "^{" + one_based(s.indices, "") + "}";
    }
    case SymbolKind::Field: {
      const auto& comp = spec.components().at(static_cast<std::size_t>(s.id));
      const auto& decl = spec.fields().at(static_cast<std::size_t>(comp.field));
      std::vector<std::string> idx;
      for (int i : comp.indices) idx.push_back(std::to_string(i + 1));
      return latex_field(spec, decl, idx, s.indices);
    }
  }
  return "?";
}

}  // namespace

std::string latex_name(const std::string& name) {
  static const std::vector<std::string> greek{
      "alpha", "beta", "gamma", "delta", "epsilon", "varepsilon", "zeta", "eta", "theta", "iota", "kappa",
      "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon", "phi", "varphi", "chi", "psi", "omega",
      "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Phi", "Psi", "Omega"};
  if (std::find(greek.begin(), greek.end(), name) != greek.end()) return "\\" + name;
  if (name.size() == 1) return name;
  return "\\mathrm{" + name + "}";
}

std::string render_symbol(const Symbol& s, const JetSpec& spec, Format format) {
  return format == Format::Plain ? spec.symbol_name(s) : latex_symbol(s, spec);
}

std::string render(const Expr& e, const JetSpec& spec, Format format) {
  if (e.is_zero()) return "0";
  TermWriter w;
  for (const auto& t : e.terms()) {
    const bool neg = t.coeff < 0;
    const Rational mag = neg ? Rational(-t.coeff) : t.coeff;
    std::vector<std::string> parts;
    if (format == Format::Plain) {
      if (t.monomial.empty()) {
        parts.push_back(to_string(mag));
      } else if (mag != 1) {
        parts.push_back(denominator(mag) == 1 ? to_string(mag) : "(" + to_string(mag) + ")");
      }
      for (const auto& f : t.monomial) parts.push_back(plain_factor(f, spec));
      std::string body;
      for (std::size_t k = 0; k < parts.size(); ++k) body += (k ? "*" : "") + parts[k];
      w.add(neg, body);
    } else {
      if (t.monomial.empty() || mag != 1) parts.push_back(latex_rational(mag));
      for (const auto& f : t.monomial) parts.push_back(with_power(latex_symbol(f.symbol, spec), f.exponent));
      std::string body;
      for (std::size_t k = 0; k < parts.size(); ++k) body += (k ? " " : "") + parts[k];
      w.add(neg, body);
    }
  }
  return w.out;
}

// ---------------------------------------------------------------- index recollection

namespace {

/// One factor copy (exponent expanded) of a template term. Abstractable index
/// positions carry labels: 0 = free index, k ≥ 1 = dummy k.
struct TFactor {
  Symbol proto;
  std::vector<int> labels;  // per abstractable slot
};

struct Template {
  Rational coeff;
  std::vector<TFactor> factors;
};

class Recollector {
 public:
  Recollector(const SourceForm& eps, int field) : eps_(eps), spec_(*eps.spec), field_(field) {
    const auto& decl = spec_.fields()[static_cast<std::size_t>(field)];
    range_ = decl.shape[0];
  }

  std::optional<std::string> run() {
    std::vector<Expr> rem = eps_.components;
    std::vector<Template> found;
    for (int guard = 0; guard < 256; ++guard) {
      int rho0 = -1;
      for (int r = 0; r < range_; ++r) {
        if (!rem[static_cast<std::size_t>(r)].is_zero()) {
          rho0 = r;
          break;
        }
      }
      if (rho0 < 0) return write(found);
      std::optional<Template> best;
      std::vector<Expr> best_rem;
      std::size_t best_score = 0;
      const std::size_t before = count_terms(rem);
      for (const auto& t : rem[static_cast<std::size_t>(rho0)].terms()) {
        for (auto& tmpl : labelings(t, rho0)) {
          const auto S = expand(tmpl);
          const Rational k = coefficient(S[static_cast<std::size_t>(rho0)], t.monomial);
          if (k == 0) continue;
          tmpl.coeff = t.coeff / k;
          std::vector<Expr> next = rem;
          for (std::size_t r = 0; r < next.size(); ++r) next[r] -= S[r].scaled(tmpl.coeff);
          const std::size_t after = count_terms(next);
          if (after < before && before - after > best_score) {
            best_score = before - after;
            best = tmpl;
            best_rem = std::move(next);
          }
        }
      }
      if (!best) return std::nullopt;
      found.push_back(*best);
      rem = std::move(best_rem);
    }
    return std::nullopt;
  }

 private:
  static std::size_t count_terms(const std::vector<Expr>& v) {
    std::size_t n = 0;
    for (const auto& e : v) n += e.terms().size();
    return n;
  }

  static Rational coefficient(const Expr& e, const Monomial& m) {
    for (const auto& t : e.terms()) {
      if (t.monomial == m) return t.coeff;
    }
    return 0;
  }

  bool is_target(const Symbol& s) const {
    return s.kind == SymbolKind::Field && spec_.components()[static_cast<std::size_t>(s.id)].field == field_;
  }

  std::vector<int> slot_values(const Symbol& s) const {
    if (s.kind == SymbolKind::Param) return s.indices;
    if (is_target(s)) return spec_.components()[static_cast<std::size_t>(s.id)].indices;
    return {};
  }

  std::vector<Template> labelings(const Term& t, int rho0) const {
    Template proto{1, {}};
    std::vector<std::pair<std::size_t, std::size_t>> slots;  // (factor, position)
    std::vector<int> values;
    for (const auto& f : t.monomial) {
      if (f.exponent < 0) return {};
      for (int c = 0; c < f.exponent; ++c) {
        const auto vals = slot_values(f.symbol);
        proto.factors.push_back({f.symbol, std::vector<int>(vals.size(), -1)});
        for (std::size_t k = 0; k < vals.size(); ++k) {
          slots.emplace_back(proto.factors.size() - 1, k);
          values.push_back(vals[k]);
        }
      }
    }
    std::vector<Template> out;
    std::vector<int> labels(slots.size(), -1);
    std::function<void(int)> rec = [&](int next_dummy) {
      std::size_t k = 0;
      while (k < labels.size() && labels[k] != -1) ++k;
      if (k == labels.size()) {
        Template tm = proto;
        for (std::size_t s = 0; s < slots.size(); ++s) tm.factors[slots[s].first].labels[slots[s].second] = labels[s];
        out.push_back(std::move(tm));
        return;
      }
      if (values[k] == rho0) {
        labels[k] = 0;
        rec(next_dummy);
        labels[k] = -1;
      }
      for (std::size_t j = k + 1; j < labels.size(); ++j) {
        if (labels[j] != -1 || values[j] != values[k]) continue;
        labels[k] = labels[j] = next_dummy;
        rec(next_dummy + 1);
        labels[k] = labels[j] = -1;
      }
    };
    rec(1);
    if (out.size() > 64) out.resize(64);
    return out;
  }

  Symbol instantiate(const TFactor& f, const std::vector<int>& assign) const {
    Symbol s = f.proto;
    std::vector<int> vals = slot_values(s);
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = assign[static_cast<std::size_t>(f.labels[k])];
    if (s.kind == SymbolKind::Param) {
      s.indices = spec_.canonical_param_indices(s.id, vals);
    } else if (is_target(s)) {
      s.id = spec_.component(field_, vals);
    }
    return s;
  }

  /// Σ over dummies of the template (coefficient 1), for every value of the free index.
  std::vector<Expr> expand(const Template& t) const {
    int dummies = 0;
    for (const auto& f : t.factors) {
      for (int l : f.labels) dummies = std::max(dummies, l);
    }
    std::vector<Expr> out(static_cast<std::size_t>(range_));
    std::vector<int> assign(static_cast<std::size_t>(dummies + 1), 0);
    std::function<void(int)> rec = [&](int d) {
      if (d > dummies) {
        Expr prod(1);
        for (const auto& f : t.factors) prod *= Expr::symbol(instantiate(f, assign));
        out[static_cast<std::size_t>(assign[0])] += prod;
        return;
      }
      for (int v = 0; v < range_; ++v) {
        assign[static_cast<std::size_t>(d)] = v;
        rec(d + 1);
      }
    };
    rec(0);
    return out;
  }

  std::string write(const std::vector<Template>& found) const {
    if (found.empty()) return "0";
    static const std::vector<std::string> dummy_names{"\\nu", "\\sigma", "\\mu", "\\lambda",
                                                      "\\kappa", "\\alpha", "\\beta", "\\gamma"};
    TermWriter w;
    for (const auto& t : found) {
      std::map<int, std::string> names{{0, "\\rho"}};
      auto label = [&](int l) {
        auto it = names.find(l);
        if (it != names.end()) return it->second;
        const std::size_t k = names.size() - 1;
        std::string n = k < dummy_names.size() ? dummy_names[k] : "\\omega_{" + std::to_string(k) + "}";
        names.emplace(l, n);
        return n;
      };
      std::vector<std::pair<std::string, int>> factors;  // rendered, multiplicity
      for (const auto& f : t.factors) {
        std::string r;
        if (f.proto.kind == SymbolKind::Param) {
          r = latex_name(spec_.params()[static_cast<std::size_t>(f.proto.id)].name) + "_{";
          for (int l : f.labels) r += label(l);
          r += "}";
        } else if (is_target(f.proto)) {
          std::vector<std::string> idx;
          for (int l : f.labels) idx.push_back(label(l));
          r = latex_field(spec_, spec_.fields()[static_cast<std::size_t>(field_)], idx, f.proto.indices);
        } else {
          r = latex_symbol(f.proto, spec_);
        }
        if (!factors.empty() && factors.back().first == r) {
          ++factors.back().second;
        } else {
          factors.emplace_back(r, 1);
        }
      }
      const bool neg = t.coeff < 0;
      const Rational mag = neg ? Rational(-t.coeff) : t.coeff;
      std::string body = (factors.empty() || mag != 1) ? latex_rational(mag) : "";
      for (const auto& [r, mult] : factors) body += (body.empty() ? "" : " ") + with_power(r, mult);
      w.add(neg, body);
    }
    return w.out;
  }

  const SourceForm& eps_;
  const JetSpec& spec_;
  int field_;
  int range_ = 0;
};

}  // namespace

std::optional<std::string> render_abstract(const SourceForm& eps) {
  const auto& spec = *eps.spec;
  if (spec.fields().size() != 1 || spec.fields()[0].shape.size() != 1) return std::nullopt;
  return Recollector(eps, 0).run();
}

}  // namespace varcomp
