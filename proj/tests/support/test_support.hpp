#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "varcomp/jet_spec.hpp"
#include "varcomp/numjet.hpp"
#include "varcomp/parser.hpp"
#include "varcomp/variational.hpp"

namespace varcomp::testing {

std::string data_path(const std::string& relative);
std::string read_text(const std::string& path);
ProblemFile load_problem(const std::string& relative);

/// Chart with `n` base variables (t, x), `m` scalar fields (u, v) and order `r`.
std::shared_ptr<JetSpec> scalar_chart(int n, int m, int r);

/// Random polynomial in the jet coordinates of order ≤ `order` (and the base
/// coordinates) with small integer coefficients.
Expr random_polynomial(const JetSpec& spec, int order, std::mt19937_64& rng, int max_terms = 5, int max_degree = 3);

struct RandomProblem {
  std::shared_ptr<JetSpec> spec;
  Expr expr;
};

/// A random chart (n ≤ 2, m ≤ 2, r ≤ 2) with a random Lagrangian density of order ≤ r.
RandomProblem random_lagrangian(std::mt19937_64& rng);
/// A random chart with random source components of order ≤ r.
SourceForm random_source_form(std::mt19937_64& rng);

/// Point of the given order for a chart, every coordinate and parameter uniform in [−1, 1].
JetPoint random_point(const JetSpec& spec, int order, std::mt19937_64& rng, const std::vector<Expr>& exprs);

/// Independent evaluation of an expression: substitutes values term by term.
double evaluate(const Expr& e, const JetPoint& p);

}  // namespace varcomp::testing
