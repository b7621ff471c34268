#include "varcomp/numjet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>

#include <boost/math/quadrature/gauss.hpp>

#include "varcomp/errors.hpp"

namespace varcomp {

// ---------------------------------------------------------------- JetLayout

JetLayout::JetLayout(int base_dim, int components, int order)
    : base_dim_(base_dim), components_(components), order_(order) {
  if (base_dim < 1 || components < 0 || order < 0) throw Error("invalid jet layout");
  multis_ = multi_indices_up_to(base_dim, order);
  for (std::size_t r = 0; r < multis_.size(); ++r) rank_[multis_[r]] = r;
  next_.resize(multis_.size());
  for (std::size_t r = 0; r < multis_.size(); ++r) {
    next_[r].resize(static_cast<std::size_t>(base_dim), npos);
    if (static_cast<int>(multis_[r].order()) < order) {
      for (int i = 0; i < base_dim; ++i) next_[r][static_cast<std::size_t>(i)] = rank_.at(multis_[r].with(i));
    }
  }
  for (int i = 0; i < base_dim; ++i) symbols_.push_back(Symbol::base(i));
  for (int c = 0; c < components; ++c) {
    for (const auto& J : multis_) symbols_.push_back(Symbol::jet(c, J));
  }
}

std::size_t JetLayout::slot(int component, const MultiIndex& J) const {
  auto it = rank_.find(J);
  if (component < 0 || component >= components_ || it == rank_.end()) return npos;
  return static_cast<std::size_t>(base_dim_) + static_cast<std::size_t>(component) * multis_.size() + it->second;
}

std::size_t JetLayout::find(const Symbol& s) const {
  if (s.kind == SymbolKind::Base) return s.id >= 0 && s.id < base_dim_ ? static_cast<std::size_t>(s.id) : npos;
  if (s.kind == SymbolKind::Field) return slot(s.id, s.multi_index());
  return npos;
}

std::size_t JetLayout::shifted(std::size_t slot, int i) const {
  if (slot < static_cast<std::size_t>(base_dim_)) return npos;
  const std::size_t rel = slot - static_cast<std::size_t>(base_dim_);
  const std::size_t comp = rel / multis_.size();
  const std::size_t rank = rel % multis_.size();
  const std::size_t nxt = next_[rank][static_cast<std::size_t>(i)];
  if (nxt == npos) return npos;
  return static_cast<std::size_t>(base_dim_) + comp * multis_.size() + nxt;
}

std::vector<std::size_t> JetLayout::component_slots(int component, int max_order) const {
  std::vector<std::size_t> out;
  for (const auto& J : multis_) {
    if (static_cast<int>(J.order()) <= max_order) out.push_back(slot(component, J));
  }
  return out;
}

// ---------------------------------------------------------------- JetPoint

JetPoint::JetPoint(std::shared_ptr<const JetLayout> layout) : layout_(std::move(layout)) {
  values_.assign(layout_->size(), 0.0);
}

double JetPoint::value(const Symbol& s) const {
  if (s.is_jet_coordinate()) {
    const auto slot = layout_->find(s);
    if (slot == JetLayout::npos) throw IncompletePoint("jet coordinate above the point's order");
    return values_[slot];
  }
  auto it = constants_.find(s);
  if (it == constants_.end()) throw IncompletePoint("no value for a parameter or atom");
  return it->second;
}

void JetPoint::set(const Symbol& s, double v) {
  if (s.is_jet_coordinate()) {
    const auto slot = layout_->find(s);
    if (slot == JetLayout::npos) throw IncompletePoint("jet coordinate above the point's order");
    values_[slot] = v;
  } else {
    constants_[s] = v;
  }
}

JetPoint JetPoint::relaid(std::shared_ptr<const JetLayout> layout) const {
  JetPoint out(std::move(layout));
  for (std::size_t k = 0; k < layout_->size(); ++k) {
    const auto slot = out.layout().find(layout_->symbol_at(k));
    if (slot != JetLayout::npos) out.values_[slot] = values_[k];
  }
  out.constants_ = constants_;
  return out;
}

// ---------------------------------------------------------------- evaluation

namespace {

double ipow(double x, int e) {
  if (e < 0) return 1.0 / ipow(x, -e);
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

}  // namespace

CompiledExpr::CompiledExpr(const Expr& e, const JetSpec& spec, const JetPoint& reference) {
  for (const auto& t : e.terms()) {
    CTerm ct{static_cast<double>(t.coeff), {}, {}};
    for (const auto& f : t.monomial) {
      const Symbol& s = f.symbol;
      if (s.is_jet_coordinate()) {
        const auto slot = reference.layout().find(s);
        if (slot == JetLayout::npos) {
          throw IncompletePoint("point of order " + std::to_string(reference.order()) + " does not cover " +
                                spec.symbol_name(s));
        }
        ct.powers.push_back({slot, f.exponent});
      } else if (reference.has_constant(s)) {
        ct.coeff *= ipow(reference.value(s), f.exponent);
      } else if (s.kind == SymbolKind::Atom && spec.atoms().at(static_cast<std::size_t>(s.id)).evaluator) {
        ct.atoms.push_back({&spec.atoms()[static_cast<std::size_t>(s.id)], s.indices, f.exponent});
      } else if (s.kind == SymbolKind::Atom) {
        throw AtomEvalFailure("atom " + spec.symbol_name(s) + " has no evaluator and no value at the point");
      } else {
        throw IncompletePoint("no value for parameter " + spec.symbol_name(s));
      }
    }
    terms_.push_back(std::move(ct));
  }
}

double CompiledExpr::operator()(const JetPoint& p) const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (const auto& pw : t.powers) v *= ipow(p[pw.slot], pw.exponent);
    for (const auto& a : t.atoms) {
      const double av = a.decl->evaluator(a.indices, p);
      if (!std::isfinite(av)) throw AtomEvalFailure("atom '" + a.decl->name + "' evaluated to a non-finite value");
      v *= ipow(av, a.exponent);
    }
    sum += v;
  }
  return sum;
}

double eval(const Expr& e, const JetPoint& p, const JetSpec& spec) { return CompiledExpr(e, spec, p)(p); }

DensityFn density_from_exprs(std::shared_ptr<const JetSpec> spec, std::vector<Expr> exprs) {
  struct Cache {
    std::mutex mutex;
    std::shared_ptr<const JetLayout> layout;
    std::map<Symbol, double> constants;
    std::shared_ptr<const std::vector<CompiledExpr>> compiled;
  };
  int order = 0;
  for (const auto& e : exprs) {
    for (const auto& s : e.symbols()) order = std::max(order, s.order());
  }
  auto cache = std::make_shared<Cache>();
  const std::size_t size = exprs.size();
  auto fn = [spec, exprs = std::move(exprs), cache](const JetPoint& p) {
    std::shared_ptr<const std::vector<CompiledExpr>> compiled;
    {
      std::lock_guard lock(cache->mutex);
      if (cache->layout != p.layout_ptr() || cache->constants != p.constants() || !cache->compiled) {
        auto fresh = std::make_shared<std::vector<CompiledExpr>>();
        for (const auto& e : exprs) fresh->emplace_back(e, *spec, p);
        cache->compiled = std::move(fresh);
        cache->layout = p.layout_ptr();
        cache->constants = p.constants();
      }
      compiled = cache->compiled;
    }
    std::vector<double> out(compiled->size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*compiled)[k](p);
    return out;
  };
  return DensityFn{std::move(fn), order, size, std::nullopt};
}

// ---------------------------------------------------------------- homotopy quadrature

JetPoint scale_components(const JetPoint& p, const std::vector<int>& components, double u) {
  JetPoint q = p;
  for (int c : components) {
    for (auto slot : p.layout().component_slots(c, p.order())) q[slot] *= u;
  }
  return q;
}

namespace {

template <int N, class F>
double gauss_unit(F&& f) {
  return boost::math::quadrature::gauss<double, N>::integrate(f, 0.0, 1.0);
}

}  // namespace

double numeric_vt_lagrangian(const DensityFn& eps, const JetPoint& p, const std::vector<int>& scaled_components,
                             const QuadratureOptions& opts) {
  auto integrand = [&](double u) {
    const JetPoint q = scale_components(p, scaled_components, u);
    const auto values = eps(q);
    double sum = 0.0;
    for (int c : scaled_components) {
      sum += p[p.layout().slot(c, MultiIndex{})] * values.at(static_cast<std::size_t>(c));
    }
    return sum;
  };

  if (opts.detect_divergence) {
    constexpr int kSamples = 20;
    std::vector<double> f(kSamples + 1);
    for (int k = 1; k <= kSamples; ++k) {
      f[static_cast<std::size_t>(k)] = integrand(std::ldexp(1.0, -k));
      if (!std::isfinite(f[static_cast<std::size_t>(k)])) {
        throw NonFiniteIntegrand("homotopy integrand is not finite at u = 2^-" + std::to_string(k),
                                 std::numeric_limits<double>::quiet_NaN());
      }
    }
    // f(u) ~ C u^w near 0 gives f(2u)/f(u) = 2^w.
    auto exponent = [&](int k) {
      const double a = std::abs(f[static_cast<std::size_t>(k)]);
      const double b = std::abs(f[static_cast<std::size_t>(k + 1)]);
      if (a == 0.0 || b == 0.0) return std::numeric_limits<double>::infinity();
      return std::log2(a / b);
    };
    const double w_tail = exponent(kSamples - 1);
    const double w_prev = exponent(kSamples - 2);
    if (w_tail <= -0.95 && w_prev <= -0.95) {
      throw NonFiniteIntegrand(
          "homotopy integrand grows like u^" + std::to_string(w_tail) + " near u = 0; the integral diverges",
          w_tail);
    }
  }

  double value = 0.0;
  switch (opts.nodes) {
    case 16:
      value = gauss_unit<16>(integrand);
      break;
    case 32:
      value = gauss_unit<32>(integrand);
      break;
    case 64:
      value = gauss_unit<64>(integrand);
      break;
    default:
      throw Error("unsupported Gauss-Legendre node count " + std::to_string(opts.nodes));
  }
  if (!std::isfinite(value)) throw NonFiniteIntegrand("homotopy quadrature is not finite", 0.0);
  return value;
}

DensityFn vt_lagrangian_density(DensityFn eps, std::vector<int> scaled_components, QuadratureOptions opts) {
  const int order = eps.order;
  auto fn = [eps = std::move(eps), comps = std::move(scaled_components), opts](const JetPoint& p) {
    return std::vector<double>{numeric_vt_lagrangian(eps, p, comps, opts)};
  };
  return DensityFn{std::move(fn), order, 1, std::nullopt};
}

// ---------------------------------------------------------------- finite differences

namespace {

std::vector<double> central(const DensityFn& f, const JetPoint& p, std::span<const double> dir, double t) {
  JetPoint plus = p;
  JetPoint minus = p;
  for (std::size_t k = 0; k < dir.size(); ++k) {
    if (dir[k] == 0.0) continue;
    plus[k] += t * dir[k];
    minus[k] -= t * dir[k];
  }
  auto a = f(plus);
  const auto b = f(minus);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = (a[k] - b[k]) / (2.0 * t);
  return a;
}

std::vector<double> directional(const DensityFn& f, const JetPoint& p, std::span<const double> dir, double t,
                                bool richardson) {
  auto coarse = central(f, p, dir, t);
  if (!richardson) return coarse;
  const auto fine = central(f, p, dir, t / 2.0);
  for (std::size_t k = 0; k < coarse.size(); ++k) coarse[k] = (4.0 * fine[k] - coarse[k]) / 3.0;
  return coarse;
}

}  // namespace

std::vector<double> numeric_partial_vec(const DensityFn& f, const JetPoint& p, std::size_t slot,
                                        const FdOptions& opts) {
  if (slot == JetLayout::npos || slot >= p.layout().size()) throw IncompletePoint("coordinate not in the point");
  std::vector<double> dir(p.layout().size(), 0.0);
  dir[slot] = 1.0;
  const double h = opts.step * std::max(1.0, std::abs(p[slot]));
  return directional(f, p, dir, h, opts.richardson);
}

double numeric_partial(const DensityFn& f, const JetPoint& p, const Symbol& v, const FdOptions& opts) {
  return numeric_partial_vec(f, p, p.layout().find(v), opts).at(0);
}

std::vector<double> numeric_total_derivative_vec(const DensityFn& f, const JetPoint& p, int i,
                                                 const FdOptions& opts) {
  const auto& layout = p.layout();
  if (i < 0 || i >= layout.base_dim()) throw Error("base index out of range");
  if (p.order() < f.order + 1) {
    throw IncompletePoint("total derivative of an order-" + std::to_string(f.order) + " density needs a point of order " +
                          std::to_string(f.order + 1));
  }
  std::vector<double> dir(layout.size(), 0.0);
  dir[static_cast<std::size_t>(i)] = 1.0;
  double norm = 1.0;
  for (std::size_t s = static_cast<std::size_t>(layout.base_dim()); s < layout.size(); ++s) {
    if (layout.symbol_at(s).order() > f.order) continue;
    dir[s] = p[layout.shifted(s, i)];
    norm = std::max(norm, std::abs(dir[s]));
  }
  return directional(f, p, dir, opts.step / norm, opts.richardson);
}

double numeric_total_derivative(const DensityFn& f, const JetPoint& p, int i, const FdOptions& opts) {
  return numeric_total_derivative_vec(f, p, i, opts).at(0);
}

DensityFn partial_density(DensityFn f, std::size_t slot, FdOptions opts) {
  const int order = f.order;
  const std::size_t size = f.size;
  auto fn = [f = std::move(f), slot, opts](const JetPoint& p) { return numeric_partial_vec(f, p, slot, opts); };
  return DensityFn{std::move(fn), order, size, std::nullopt};
}

DensityFn total_derivative_density(DensityFn f, int i, FdOptions opts) {
  const int order = f.order + 1;
  const std::size_t size = f.size;
  auto fn = [f = std::move(f), i, opts](const JetPoint& p) { return numeric_total_derivative_vec(f, p, i, opts); };
  return DensityFn{std::move(fn), order, size, std::nullopt};
}

std::vector<double> numeric_euler_lagrange(const DensityFn& L, const JetPoint& p, const NestedFdOptions& opts,
                                           const std::vector<int>& components) {
  const auto& layout = p.layout();
  const int s = L.order;
  if (p.order() < 2 * s) {
    throw IncompletePoint("Euler-Lagrange of an order-" + std::to_string(s) + " density needs a point of order " +
                          std::to_string(2 * s));
  }
  std::vector<int> comps = components;
  if (comps.empty()) {
    for (int c = 0; c < layout.components(); ++c) comps.push_back(c);
  }
  const FdOptions fd{opts.step, opts.richardson};
  const auto multis = multi_indices_up_to(layout.base_dim(), s);
  std::vector<double> out;
  out.reserve(comps.size());
  for (int sigma : comps) {
    double E = 0.0;
    for (const auto& K : multis) {
      DensityFn g = partial_density(L, layout.slot(sigma, K), fd);
      for (int k : K.indices()) g = total_derivative_density(std::move(g), k, fd);
      const double term = g(p).at(0);
      E += (K.order() % 2 == 0) ? term : -term;
    }
    out.push_back(E);
  }
  return out;
}

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

}  // namespace

NumericHelmholtz numeric_helmholtz(const DensityFn& eps, const JetPoint& p, int source_order,
                                   const NestedFdOptions& opts) {
  const auto& layout = p.layout();
  const int r = source_order;
  const int n = layout.base_dim();
  const int m = layout.components();
  if (p.order() < 2 * r) {
    throw IncompletePoint("Helmholtz coefficients of an order-" + std::to_string(r) +
                          " source form need a point of order " + std::to_string(2 * r));
  }
  const FdOptions fd{opts.step, opts.richardson};
  const auto multis = multi_indices_up_to(n, r);

  std::map<std::size_t, std::vector<double>> partials;
  auto P = [&](int comp, const MultiIndex& J) -> const std::vector<double>& {
    const auto slot = layout.slot(comp, J);
    auto it = partials.find(slot);
    if (it == partials.end()) it = partials.emplace(slot, numeric_partial_vec(eps, p, slot, fd)).first;
    return it->second;
  };
  std::map<std::pair<std::size_t, MultiIndex>, std::vector<double>> nested;
  auto D = [&](int comp, const MultiIndex& M, const MultiIndex& K) -> const std::vector<double>& {
    const auto slot = layout.slot(comp, M);
    auto key = std::make_pair(slot, K);
    auto it = nested.find(key);
    if (it == nested.end()) {
      DensityFn g = partial_density(eps, slot, fd);
      for (int k : K.indices()) g = total_derivative_density(std::move(g), k, fd);
      it = nested.emplace(std::move(key), g(p)).first;
    }
    return it->second;
  };

  NumericHelmholtz out;
  for (const auto& J : multis) {
    const int k = static_cast<int>(J.order());
    for (int sigma = 0; sigma < m; ++sigma) {
      for (int nu = 0; nu < m; ++nu) {
        double H = P(nu, J)[static_cast<std::size_t>(sigma)];
        const double swapped = P(sigma, J)[static_cast<std::size_t>(nu)];
        H -= (k % 2 == 0) ? swapped : -swapped;
        for (int l = k + 1; l <= r; ++l) {
          const double sign = (l % 2 == 0) ? 1.0 : -1.0;
          for (const auto& Kp : multi_indices_of_order(n, l - k)) {
            const MultiIndex M = J.merged(Kp);
            const double mult = static_cast<double>(J.orderings()) * static_cast<double>(Kp.orderings()) /
                                static_cast<double>(M.orderings());
            H -= sign * binomial(l, k) * mult * D(sigma, M, Kp)[static_cast<std::size_t>(nu)];
          }
        }
        out.entries[{sigma, nu, J}] = H;
        out.max_abs = std::max(out.max_abs, std::abs(H));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- sampling

JetPoint random_jet_point(std::shared_ptr<const JetLayout> layout, std::mt19937_64& rng,
                          const std::vector<Symbol>& params) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  JetPoint p(std::move(layout));
  for (auto& v : p.values()) v = dist(rng);
  for (const auto& s : params) p.set(s, dist(rng));
  return p;
}

std::vector<Symbol> parameter_symbols(const std::vector<Expr>& exprs) {
  std::set<Symbol> out;
  for (const auto& e : exprs) {
    for (const auto& s : e.symbols()) {
      if (s.kind == SymbolKind::Param) out.insert(s);
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace varcomp
