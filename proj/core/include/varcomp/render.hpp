#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "varcomp/expr.hpp"
#include "varcomp/jet_spec.hpp"
#include "varcomp/variational.hpp"

namespace varcomp {

enum class Format : std::uint8_t { Plain, Latex };

/// Deterministic rendering. Plain output is valid DSL and parses back to `e`.
std::string render(const Expr& e, const JetSpec& spec, Format format = Format::Plain);
std::string render_symbol(const Symbol& s, const JetSpec& spec, Format format);

/// `alpha` → `\alpha`, single letters unchanged, other words in \mathrm.
std::string latex_name(const std::string& name);

/// LaTeX of a source form over one vector field as a single indexed formula
/// with free index ρ and summed dummies (e.g. `-a_{\rho\nu} \dot{q}^{\nu}`).
/// Empty when the components do not fit such a pattern.
std::optional<std::string> render_abstract(const SourceForm& eps);

}  // namespace varcomp
