#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "varcomp/expr.hpp"
#include "varcomp/jet_spec.hpp"

namespace varcomp {

/// Slot layout of a numeric jet point of order s: base coordinates first, then
/// for every component σ its coordinates y^σ_J for all sorted J with |J| ≤ s.
class JetLayout {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  JetLayout(int base_dim, int components, int order);

  int base_dim() const noexcept { return base_dim_; }
  int components() const noexcept { return components_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return symbols_.size(); }

  std::size_t slot(int component, const MultiIndex& J) const;
  std::size_t find(const Symbol& s) const;  // npos when absent
  const Symbol& symbol_at(std::size_t slot) const { return symbols_[slot]; }
  /// Slot of y^σ_{J∪i} for the field slot y^σ_J, npos when above the order.
  std::size_t shifted(std::size_t slot, int i) const;
  /// Field slots of one component, in multi-index order.
  std::vector<std::size_t> component_slots(int component, int max_order) const;

 private:
  int base_dim_;
  int components_;
  int order_;
  std::vector<MultiIndex> multis_;
  std::map<MultiIndex, std::size_t> rank_;
  std::vector<std::vector<std::size_t>> next_;  // rank -> base index -> rank
  std::vector<Symbol> symbols_;
};

/// A point of J^s Y: a value for every jet coordinate up to the layout's order,
/// plus values for parameters (and, optionally, atoms) used when evaluating.
class JetPoint {
 public:
  explicit JetPoint(std::shared_ptr<const JetLayout> layout);

  const JetLayout& layout() const noexcept { return *layout_; }
  const std::shared_ptr<const JetLayout>& layout_ptr() const noexcept { return layout_; }
  int order() const noexcept { return layout_->order(); }

  double operator[](std::size_t slot) const { return values_[slot]; }
  double& operator[](std::size_t slot) { return values_[slot]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// Value of a jet coordinate, parameter or atom override; throws IncompletePoint.
  double value(const Symbol& s) const;
  void set(const Symbol& s, double v);
  bool has_constant(const Symbol& s) const { return constants_.count(s) != 0; }
  const std::map<Symbol, double>& constants() const noexcept { return constants_; }

  /// Same point re-laid on a layout of another order; new slots are zero.
  JetPoint relaid(std::shared_ptr<const JetLayout> layout) const;

 private:
  std::shared_ptr<const JetLayout> layout_;
  std::vector<double> values_;
  std::map<Symbol, double> constants_;
};

/// Deterministic black-box density, scalar or vector valued (one entry per
/// source-form component), of a declared jet order.
struct DensityFn {
  std::function<std::vector<double>(const JetPoint&)> fn;
  int order = 0;
  std::size_t size = 1;
  std::optional<double> weight;

  std::vector<double> operator()(const JetPoint& p) const { return fn(p); }
};

/// Expression compiled against a point layout and its constants, for fast
/// repeated evaluation at perturbed points.
class CompiledExpr {
 public:
  CompiledExpr(const Expr& e, const JetSpec& spec, const JetPoint& reference);
  double operator()(const JetPoint& p) const;

 private:
  struct Power {
    std::size_t slot;
    int exponent;
  };
  struct AtomCall {
    const AtomDecl* decl;
    std::vector<int> indices;
    int exponent;
  };
  struct CTerm {
    double coeff;
    std::vector<Power> powers;
    std::vector<AtomCall> atoms;
  };
  std::vector<CTerm> terms_;
};

/// Direct evaluation. Throws IncompletePoint for a missing coordinate or
/// parameter, AtomEvalFailure for an atom with neither evaluator nor value.
double eval(const Expr& e, const JetPoint& p, const JetSpec& spec);

/// Density whose components are the given expressions; compiled per layout.
DensityFn density_from_exprs(std::shared_ptr<const JetSpec> spec, std::vector<Expr> exprs);

struct QuadratureOptions {
  int nodes = 32;  // Gauss-Legendre nodes on (0,1); 16, 32 or 64
  bool detect_divergence = true;
};

/// y^σ ∫₀¹ ε_σ(χ_u p) du summed over `scaled_components`, where χ_u multiplies
/// every jet coordinate of those components by u. Throws NonFiniteIntegrand
/// when dyadic sampling near u = 0 shows an integrand growing like u^w, w ≤ −1.
double numeric_vt_lagrangian(const DensityFn& eps, const JetPoint& p, const std::vector<int>& scaled_components,
                             const QuadratureOptions& opts = {});
/// The same quantity wrapped as a scalar density of the source form's order.
DensityFn vt_lagrangian_density(DensityFn eps, std::vector<int> scaled_components, QuadratureOptions opts = {});

/// Applies the homothety χ_u to the listed components.
JetPoint scale_components(const JetPoint& p, const std::vector<int>& components, double u);

struct FdOptions {
  double step = 1e-6;  // relative: h = step · max(1, |p[v]|)
  bool richardson = false;
};

/// Step used by every level of nested differences (Euler-Lagrange, Helmholtz).
struct NestedFdOptions {
  double step = 1e-3;
  bool richardson = false;
};

std::vector<double> numeric_partial_vec(const DensityFn& f, const JetPoint& p, std::size_t slot,
                                        const FdOptions& opts = {});
double numeric_partial(const DensityFn& f, const JetPoint& p, const Symbol& v, const FdOptions& opts = {});

/// d_i f = ∂f/∂x^i + Σ p[y_{J∪i}] ∂f/∂y_J, taken as one central difference
/// along the prolongation direction. Needs p.order() ≥ f.order + 1.
std::vector<double> numeric_total_derivative_vec(const DensityFn& f, const JetPoint& p, int i,
                                                 const FdOptions& opts = {});
double numeric_total_derivative(const DensityFn& f, const JetPoint& p, int i, const FdOptions& opts = {});

DensityFn partial_density(DensityFn f, std::size_t slot, FdOptions opts);
DensityFn total_derivative_density(DensityFn f, int i, FdOptions opts);

/// E_σ = Σ_K (−1)^{|K|} d_K ∂L/∂y^σ_K over sorted K, |K| ≤ order(L).
/// `components` restricts σ (all components when empty); one value per listed σ.
std::vector<double> numeric_euler_lagrange(const DensityFn& L, const JetPoint& p, const NestedFdOptions& opts = {},
                                           const std::vector<int>& components = {});

struct NumericHelmholtz {
  std::map<HelmholtzIndex, double> entries;
  double max_abs = 0.0;

  bool variational(double tol = 1e-5) const { return max_abs < tol; }
};

/// Every H_{σν}^J(p) of a source form of order `source_order`; needs
/// p.order() ≥ 2·source_order.
NumericHelmholtz numeric_helmholtz(const DensityFn& eps, const JetPoint& p, int source_order,
                                   const NestedFdOptions& opts = {});

/// Uniform [−1, 1] draw for every coordinate slot and every listed parameter.
JetPoint random_jet_point(std::shared_ptr<const JetLayout> layout, std::mt19937_64& rng,
                          const std::vector<Symbol>& params = {});

/// Parameter entries occurring in the expressions.
std::vector<Symbol> parameter_symbols(const std::vector<Expr>& exprs);

}  // namespace varcomp
