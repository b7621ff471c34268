#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "varcomp/expr.hpp"

namespace varcomp {

class JetPoint;

struct FieldDecl {
  std::string name;
  std::vector<int> shape;  // empty for a scalar field
  bool symmetric = false;  // fully symmetric in its tensor indices
  int first_component = 0;
  int component_count = 1;
};

/// One scalar component y^σ of a (possibly tensor-valued) field.
struct FieldComponent {
  int field = 0;
  std::vector<int> indices;
};

struct ParamDecl {
  std::string name;
  std::optional<int> arity;            // fixed on first use when not declared
  std::optional<std::vector<int>> shape;
  bool symmetric = false;
};

/// Opaque non-polynomial object (e.g. inverse metric, √|g|). Differentiable
/// symbolically only when `derivative` is set; evaluable only when
/// `evaluator` is set or the point supplies its value.
struct AtomDecl {
  using Rule = std::function<std::optional<Expr>(const std::vector<int>& indices, const Symbol& var)>;
  using Evaluator = std::function<double(const std::vector<int>& indices, const JetPoint& point)>;

  std::string name;
  std::vector<int> shape;
  bool symmetric = false;
  std::vector<int> depends;  // field ids whose jets (up to `order`) the atom reads
  int order = 0;
  std::optional<Rational> weight;
  Rule derivative;
  Evaluator evaluator;
};

/// Coordinate chart of J^r Y: base variables, fields, parameters, atoms.
/// Field components are flattened in declaration order; symmetric tensor
/// fields contribute one component per sorted index tuple.
class JetSpec {
 public:
  int add_base(const std::string& name);
  int add_field(const std::string& name, std::vector<int> shape = {}, bool symmetric = false);
  int add_param(const std::string& name, std::optional<std::vector<int>> shape = std::nullopt,
                bool symmetric = false, std::optional<int> arity = std::nullopt);
  int add_atom(AtomDecl decl);
  void set_max_order(int r);

  int base_dim() const noexcept { return static_cast<int>(bases_.size()); }
  int component_count() const noexcept { return static_cast<int>(components_.size()); }
  int max_order() const noexcept { return max_order_; }
  /// Highest jet order any coordinate may carry (2r).
  int coordinate_cap() const noexcept { return 2 * max_order_; }
  /// Copy whose order is raised to at least `r`; expressions stay compatible.
  JetSpec promoted(int r) const;

  const std::vector<std::string>& bases() const noexcept { return bases_; }
  const std::vector<FieldDecl>& fields() const noexcept { return fields_; }
  const std::vector<FieldComponent>& components() const noexcept { return components_; }
  const std::vector<ParamDecl>& params() const noexcept { return params_; }
  const std::vector<AtomDecl>& atoms() const noexcept { return atoms_; }
  ParamDecl& param_decl(int id) { return params_.at(static_cast<std::size_t>(id)); }
  AtomDecl& atom_decl(int id) { return atoms_.at(static_cast<std::size_t>(id)); }

  std::optional<int> find_base(const std::string& name) const;
  std::optional<int> find_field(const std::string& name) const;
  std::optional<int> find_param(const std::string& name) const;
  std::optional<int> find_atom(const std::string& name) const;
  bool name_taken(const std::string& name) const;

  /// Component σ of `field` at tensor indices (canonicalized for symmetric fields).
  int component(int field, std::vector<int> indices) const;
  /// Components of the listed fields, ascending.
  std::vector<int> components_of(const std::vector<int>& field_ids) const;
  std::vector<int> all_field_ids() const;

  Expr base(int i) const;
  Expr coord(int component, const MultiIndex& J = {}) const;
  Expr param(int id, std::vector<int> indices = {}) const;
  Expr atom(int id, std::vector<int> indices = {}) const;
  std::vector<int> canonical_param_indices(int id, std::vector<int> indices) const;
  std::vector<int> canonical_atom_indices(int id, std::vector<int> indices) const;

  /// True when atom `atom_id` reads the jet coordinate `var`.
  bool atom_depends_on(int atom_id, const Symbol& var) const;
  bool atom_depends_on_field(int atom_id, int field_id) const;

  /// Human-readable symbol name in the problem DSL's syntax.
  std::string symbol_name(const Symbol& s) const;
  std::string component_name(int component) const;

  /// Enforces n ≥ 1, m ≥ 1, r ≥ 0 and distinct names.
  void validate() const;

 private:
  std::vector<std::string> bases_;
  std::vector<FieldDecl> fields_;
  std::vector<FieldComponent> components_;
  std::vector<ParamDecl> params_;
  std::vector<AtomDecl> atoms_;
  int max_order_ = 0;
};

}  // namespace varcomp
