#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "varcomp/calculus.hpp"
#include "varcomp/expr.hpp"
#include "varcomp/jet_spec.hpp"
#include "varcomp/numjet.hpp"

namespace varcomp {

/// ε = ε_σ ω^σ ∧ ω_0: one component per flattened field component.
struct SourceForm {
  std::shared_ptr<const JetSpec> spec;
  std::vector<Expr> components;

  /// Highest jet order among the components.
  int order() const;
  bool is_zero() const;
};

SourceForm operator+(const SourceForm& a, const SourceForm& b);
SourceForm operator-(const SourceForm& a, const SourceForm& b);
bool operator==(const SourceForm& a, const SourceForm& b);

struct Lagrangian {
  std::shared_ptr<const JetSpec> spec;
  Expr density;

  int order() const;
};

/// Nonzero coefficients H_{σν}^J of a source form, keyed by sorted J.
/// Absent entries are zero.
struct HelmholtzTensor {
  std::shared_ptr<const JetSpec> spec;
  int order = 0;
  std::map<HelmholtzIndex, Expr> entries;

  bool all_zero() const { return entries.empty(); }
  Expr entry(int sigma, int nu, const MultiIndex& J) const;
};

/// Spec whose coordinate cap admits coordinates of order `needed`.
std::shared_ptr<const JetSpec> spec_with_cap(const std::shared_ptr<const JetSpec>& spec, int needed);

/// E_σ = Σ_K (−1)^{|K|} d_K ∂L/∂y^σ_K over sorted K, |K| ≤ order(L).
SourceForm euler_lagrange(const Lagrangian& lambda);

HelmholtzTensor helmholtz(const SourceForm& eps);

/// L_ε = Σ_σ y^σ Σ_w ε_σ^{(w)} / (w + 1), with σ over the components of the
/// scaled fields (all fields when `scaled_fields` is empty). Throws
/// DivergentHomotopy for a weight −1 part.
Lagrangian vt_lagrangian(const SourceForm& eps, const std::vector<int>& scaled_fields = {});

/// τ = E(λ_ε) − ε.
SourceForm canonical_completion(const SourceForm& eps, const std::vector<int>& scaled_fields = {});

/// τ_ν = −∫₀¹ u Σ_{σ,J} y^σ_J (H_{νσ}^J ∘ χ_u) du under the full homothety.
/// Throws DivergentHomotopy for a weight −2 part of a coefficient.
SourceForm completion_via_helmholtz(const SourceForm& eps);

/// Integrates by parts every term G·y^σ_J linear in a coordinate of the
/// highest order s with ord(G) ≤ s − 2, lowering the order while it drops.
Lagrangian reduce_order(const Lagrangian& lambda);

enum class VerdictPath : std::uint8_t { Symbolic, Numeric };

struct ZeroTestOptions {
  int points = 20;
  std::uint64_t seed = 42;
  double tolerance = 1e-9;
  /// Point sampler for numeric tests; uniform [−1, 1] coordinates when unset.
  std::function<JetPoint(std::mt19937_64&)> sampler;
};

struct ZeroTest {
  bool zero = true;
  VerdictPath path = VerdictPath::Symbolic;
  double max_residual = 0.0;
};

/// Structural zero test for polynomial expressions; numeric evaluation at
/// random points for expressions carrying atoms. Throws AtomEvalFailure when
/// an atom cannot be evaluated.
ZeroTest zero_test(const std::vector<Expr>& exprs, const JetSpec& spec, const ZeroTestOptions& opts = {});

struct Verdict {
  bool variational = true;
  VerdictPath path = VerdictPath::Symbolic;
  double max_residual = 0.0;
};

Verdict decide_variational(const HelmholtzTensor& h, const ZeroTestOptions& opts = {});

}  // namespace varcomp
