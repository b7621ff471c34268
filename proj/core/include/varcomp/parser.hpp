#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "varcomp/jet_spec.hpp"
#include "varcomp/variational.hpp"

namespace varcomp {

struct CheckSettings {
  int points = 20;
  std::uint64_t seed = 42;
  double tolerance = 1e-6;
};

/// A parsed problem: the chart, at most one of {source form, Lagrangian},
/// the homotopy's scaled fields and numeric-check settings.
struct ProblemFile {
  std::shared_ptr<JetSpec> spec;
  std::string source_name;
  std::optional<SourceForm> source;
  std::string lagrangian_name;
  std::optional<Lagrangian> lagrangian;
  std::vector<int> scaled_fields;  // field ids; every field unless `scale` is given
  bool scale_declared = false;
  CheckSettings checks;
};

/// Parses the problem DSL. Throws SyntaxError or SemanticError.
ProblemFile parse(std::string_view text);

/// Parses one expression against an existing chart (Einstein summation applies;
/// free indices are errors).
Expr parse_expression(std::string_view text, const JetSpec& spec);

/// Parses a point file: lines `coordinate = value`, `#` comments.
std::vector<std::pair<Symbol, double>> parse_point(std::string_view text, const JetSpec& spec);

}  // namespace varcomp
