#include "varcomp/parser.hpp"

#include <string>

#include "gtest/gtest.h"
#include "test_support.hpp"
#include "varcomp/calculus.hpp"
#include "varcomp/errors.hpp"

namespace varcomp {
namespace {

using testing::load_problem;

TEST(Parser, DampedOscillatorChart) {
  const ProblemFile pf = load_problem("damped.vc");
  const JetSpec& spec = *pf.spec;
  EXPECT_EQ(spec.base_dim(), 1);
  EXPECT_EQ(spec.component_count(), 2);
  EXPECT_EQ(spec.max_order(), 2);
  ASSERT_TRUE(pf.source.has_value());
  EXPECT_FALSE(pf.lagrangian.has_value());
  EXPECT_EQ(pf.source_name, "eps");
  EXPECT_FALSE(pf.scale_declared);
  EXPECT_EQ(pf.scaled_fields, spec.all_field_ids());
  const Expr m12 = spec.param(*spec.find_param("m"), {0, 1});
  EXPECT_EQ(m12, spec.param(*spec.find_param("m"), {1, 0}));
  const Expr first = parse_expression(
      "m[1,1]*D2(q[1]) + m[1,2]*D2(q[2]) + k[1,1]*q[1] + k[1,2]*q[2] + a[1,1]*D1(q[1]) + a[1,2]*D1(q[2])", spec);
  EXPECT_EQ(pf.source->components[0], first);
}

TEST(Parser, EveryShippedProblemParses) {
  for (const char* name : {"free_oscillations.vc", "damped.vc", "cubic_friction.vc", "wave_2d.vc",
                           "harmonic_lagrangian.vc", "em_covariant.vc"}) {
    EXPECT_NO_THROW(load_problem(name)) << name;
  }
}

TEST(Parser, CheckSettingsAndScale) {
  const ProblemFile wave = load_problem("wave_2d.vc");
  EXPECT_EQ(wave.checks.points, 10);
  EXPECT_EQ(wave.checks.seed, 7u);
  EXPECT_DOUBLE_EQ(wave.checks.tolerance, 1e-6);
  EXPECT_EQ(wave.spec->base_dim(), 2);

  const ProblemFile em = load_problem("em_covariant.vc");
  EXPECT_TRUE(em.scale_declared);
  ASSERT_EQ(em.scaled_fields.size(), 1u);
  EXPECT_EQ(em.spec->fields()[static_cast<std::size_t>(em.scaled_fields[0])].name, "g");
  EXPECT_EQ(em.spec->component_count(), 4 + 10);
}

TEST(Parser, LagrangianFile) {
  const ProblemFile pf = load_problem("harmonic_lagrangian.vc");
  ASSERT_TRUE(pf.lagrangian.has_value());
  EXPECT_EQ(pf.lagrangian_name, "L");
  EXPECT_EQ(pf.lagrangian->density, parse_expression("m*D1(q)^2/2 - k*q*q/2", *pf.spec));
}

TEST(Parser, SummationAndFreeIndices) {
  const ProblemFile pf = parse("base t;\nfield q[3] order 1;\nparam w[3];\nsource e[i] = w[i]*q[j]*q[j];\n");
  ASSERT_EQ(pf.source->components.size(), 3u);
  EXPECT_EQ(pf.source->components[2], parse_expression("w[3]*(q[1]^2 + q[2]^2 + q[3]^2)", *pf.spec));
}

TEST(Parser, TwoBaseDerivatives) {
  const ProblemFile pf = load_problem("wave_2d.vc");
  const JetSpec& spec = *pf.spec;
  EXPECT_EQ(parse_expression("D(u; x, t)", spec), spec.coord(0, MultiIndex({0, 1})));
  EXPECT_EQ(parse_expression("D(u; t, x)", spec), spec.coord(0, MultiIndex({0, 1})));
}

void expect_syntax_error(const std::string& text, int line, int column) {
  try {
    parse(text);
    FAIL() << "expected a syntax error for: " << text;
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_EQ(e.column(), column) << e.what();
  }
}

void expect_semantic_error(const std::string& text, const std::string& fragment) {
  try {
    parse(text);
    FAIL() << "expected a semantic error for: " << text;
  } catch (const SemanticError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(ParserErrors, SyntaxErrorsCarryPositions) {
  expect_syntax_error("base t\nfield q order 1;", 2, 1);
  expect_syntax_error("base t;\nfield q order 1;\nsource e = q +* q;", 3, 15);
  expect_syntax_error("base t;\nfield q order 1;\nsource e = q $ q;", 3, 14);
  expect_syntax_error("bogus t;", 1, 1);
}

TEST(ParserErrors, SemanticErrors) {
  expect_semantic_error("base t;\nfield q[2] order 1;\nsource e[s] = q[v];", "free index 'v'");
  expect_semantic_error("base t;\nfield q order 1;\nsource e = D2(q);", "order overflow");
  expect_semantic_error("base t;\nfield q order 1;\nsource e = p;", "unknown name 'p'");
  expect_semantic_error("base t;\nfield q order 1;\nfield q order 1;", "q");
  expect_semantic_error("base t;\nfield q order 1;\nsource e = q;\nlagrangian L = q;", "not both");
  expect_semantic_error("base t;\nfield q order 1;\nsource e = q;\nsource f = q;", "only one source form");
  expect_semantic_error("base t;\nfield q[2] order 1;\nsource e[s] = q[3];", "out of range");
  expect_semantic_error("base t;\nfield q order 1;\nsource e = q/0;", "division by zero");
  expect_semantic_error("base t;\nfield q order 1;\nsource e = q;\ncheck points 0;", "at least 1");
}

TEST(ParserErrors, EmptyAndCommentOnlyFilesAreRejected) {
  EXPECT_THROW(parse(""), Error);
  EXPECT_THROW(parse("# nothing here\n"), Error);
}

TEST(PointFile, ParsesAssignments) {
  const ProblemFile pf = load_problem("damped.vc");
  const auto values = parse_point(testing::read_text(testing::data_path("points/damped.pt")), *pf.spec);
  EXPECT_EQ(values.size(), 15u);
  EXPECT_EQ(values.front().first, Symbol::jet(0, MultiIndex{}));
  EXPECT_DOUBLE_EQ(values.front().second, 0.5);
  EXPECT_THROW(parse_point("q[1] = 1\nq[1] = 2\n", *pf.spec), SemanticError);
  EXPECT_THROW(parse_point("q[1] 1\n", *pf.spec), SyntaxError);
}

TEST(Parser, AtomValuesAndDerivativeRules) {
  const ProblemFile pf = parse(
      "base t;\nfield q order 1;\natom w depends q order 0 value 1/(1 + q^2);\n"
      "deriv w wrt q = -2*q*w^2;\nsource e = w*D1(q);\n");
  const JetSpec& spec = *pf.spec;
  const Expr w = spec.atom(*spec.find_atom("w"));
  const Expr q = spec.coord(0);
  EXPECT_EQ(partial(w, Symbol::jet(0, MultiIndex{}), spec), (q * w.pow(2)).scaled(-2));
  auto layout = std::make_shared<const JetLayout>(1, 1, 1);
  JetPoint p(layout);
  p.set(Symbol::jet(0, MultiIndex{}), 0.5);
  EXPECT_DOUBLE_EQ(eval(w, p, spec), 0.8);
  const ZeroTest z = zero_test({w * (Expr(1) + q.pow(2)) - Expr(1)}, spec);
  EXPECT_TRUE(z.zero);
  EXPECT_EQ(z.path, VerdictPath::Numeric);
}

}  // namespace
}  // namespace varcomp
