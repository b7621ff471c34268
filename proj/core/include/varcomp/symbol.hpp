#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace varcomp {

using Rational = boost::multiprecision::cpp_rational;

/// Sorted multiset of base-variable indices (0-based). Jet coordinates are
/// symmetric in their lower indices, so y_{12} and y_{21} are the same key.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> indices);

  std::size_t order() const noexcept { return idx_.size(); }
  bool empty() const noexcept { return idx_.empty(); }
  const std::vector<int>& indices() const noexcept { return idx_; }

  /// J ∪ {i}
  MultiIndex with(int i) const;
  /// J ∪ K
  MultiIndex merged(const MultiIndex& other) const;
  int count(int i) const noexcept;
  /// Number of distinct ordered tuples whose sorted form is this multi-index.
  std::uint64_t orderings() const;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

 private:
  std::vector<int> idx_;
};

/// Every sorted multi-index over `base_dim` variables with length exactly `order`.
std::vector<MultiIndex> multi_indices_of_order(int base_dim, int order);
/// Every sorted multi-index of length 0..max_order, grouped by length.
std::vector<MultiIndex> multi_indices_up_to(int base_dim, int max_order);

/// Ordering of the kinds doubles as the factor order in canonical monomials,
/// so constants come before jet coordinates when rendered.
enum class SymbolKind : std::uint8_t { Param, Atom, Base, Field };

/// Leaf of an expression: a parameter or atom entry, a base coordinate x^i, or a
/// jet coordinate y^σ_J. For fields `id` is the flattened component index σ and
/// `indices` the sorted multi-index J; for params and atoms `indices` are the
/// (canonicalized) tensor indices.
struct Symbol {
  SymbolKind kind = SymbolKind::Param;
  int id = 0;
  std::vector<int> indices;

  static Symbol base(int i) { return {SymbolKind::Base, i, {}}; }
  static Symbol jet(int component, const MultiIndex& J) {
    return {SymbolKind::Field, component, J.indices()};
  }
  static Symbol param(int id, std::vector<int> idx) {
    return {SymbolKind::Param, id, std::move(idx)};
  }
  static Symbol atom(int id, std::vector<int> idx) { return {SymbolKind::Atom, id, std::move(idx)}; }

  bool is_jet_coordinate() const noexcept {
    return kind == SymbolKind::Base || kind == SymbolKind::Field;
  }
  /// Jet order of a field coordinate; 0 for everything else.
  int order() const noexcept { return kind == SymbolKind::Field ? static_cast<int>(indices.size()) : 0; }
  MultiIndex multi_index() const { return MultiIndex(indices); }

  auto operator<=>(const Symbol&) const = default;
  bool operator==(const Symbol&) const = default;
};

}  // namespace varcomp

namespace varcomp {

/// Key of a Helmholtz coefficient H_{σν}^{J}: components σ, ν and the sorted
/// multi-index J.
struct HelmholtzIndex {
  int sigma = 0;
  int nu = 0;
  MultiIndex J;

  auto operator<=>(const HelmholtzIndex&) const = default;
  bool operator==(const HelmholtzIndex&) const = default;
};

}  // namespace varcomp
