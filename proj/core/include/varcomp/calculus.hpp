#pragma once

#include <vector>

#include "varcomp/expr.hpp"
#include "varcomp/jet_spec.hpp"

namespace varcomp {

/// Highest jet order among the field coordinates and atoms in `e` (0 if none).
int jet_order(const Expr& e, const JetSpec& spec);

/// ∂e/∂v for a jet coordinate v, every sorted jet coordinate being independent.
/// Throws MissingDerivativeRule when an atom reading v has no rule for it.
Expr partial(const Expr& e, const Symbol& var, const JetSpec& spec);

/// Formal total derivative d_i e. Throws OrderOverflow if the result would need
/// a coordinate above spec.coordinate_cap().
Expr total_derivative(const Expr& e, int base_index, const JetSpec& spec);
/// d_{k1} ... d_{kl} e for K = {k1..kl}.
Expr total_derivative(const Expr& e, const MultiIndex& K, const JetSpec& spec);

struct WeightedComponent {
  Rational weight;
  Expr component;

  bool operator==(const WeightedComponent&) const = default;
};

/// Splits e into homogeneous parts under the homothety that multiplies every
/// jet coordinate of `scaled_fields` (field ids) by u. Parts are returned in
/// ascending weight order and sum back to e. Throws UnknownWeight for an atom
/// reading a scaled field without a declared weight.
std::vector<WeightedComponent> homogeneous_decompose(const Expr& e, const std::vector<int>& scaled_fields,
                                                     const JetSpec& spec);

}  // namespace varcomp
