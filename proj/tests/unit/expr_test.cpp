#include "varcomp/expr.hpp"

#include <random>
#include <stdexcept>

#include "gtest/gtest.h"
#include "test_support.hpp"

namespace varcomp {
namespace {

Expr x() { return Expr::symbol(Symbol::base(0)); }
Expr y() { return Expr::symbol(Symbol::jet(0, MultiIndex{})); }
Expr yt() { return Expr::symbol(Symbol::jet(0, MultiIndex({0}))); }

TEST(MultiIndex, SortsAndCountsOrderings) {
  const MultiIndex J({1, 0, 1});
  EXPECT_EQ(J.indices(), (std::vector<int>{0, 1, 1}));
  EXPECT_EQ(J.count(1), 2);
  EXPECT_EQ(J.orderings(), 3u);
  EXPECT_EQ(J.with(0), MultiIndex({0, 0, 1, 1}));
  EXPECT_EQ(MultiIndex({0}).merged(MultiIndex({1, 1})), MultiIndex({1, 0, 1}));
}

TEST(MultiIndex, EnumeratesSortedIndices) {
  EXPECT_EQ(multi_indices_of_order(2, 2).size(), 3u);
  EXPECT_EQ(multi_indices_of_order(4, 2).size(), 10u);
  EXPECT_EQ(multi_indices_up_to(3, 2).size(), 1u + 3u + 6u);
  EXPECT_TRUE(multi_indices_up_to(2, 0).front().empty());
}

TEST(Expr, ZeroAndConstants) {
  EXPECT_TRUE(Expr().is_zero());
  EXPECT_TRUE(Expr(0).is_zero());
  EXPECT_EQ(Expr(3).constant_value(), Rational(3));
  EXPECT_FALSE(x().constant_value().has_value());
  EXPECT_EQ(Expr(2) + Expr(Rational(1, 2)), Expr(Rational(5, 2)));
}

TEST(Expr, CollectsLikeTerms) {
  EXPECT_EQ(x() * y() + y() * x(), (x() * y()).scaled(2));
  EXPECT_TRUE((x() * y() - y() * x()).is_zero());
  EXPECT_EQ((x() + y()) * (x() - y()), x().pow(2) - y().pow(2));
}

TEST(Expr, ExpandsPowersOfSums) {
  const Expr s = x() + Expr(1);
  EXPECT_EQ(s.pow(3), x().pow(3) + x().pow(2).scaled(3) + x().scaled(3) + Expr(1));
  EXPECT_EQ(s.pow(0), Expr(1));
}

TEST(Expr, LaurentMonomials) {
  EXPECT_EQ(x().pow(-2) * x().pow(3), x());
  EXPECT_EQ((x() * y()).pow(-1) * y(), x().pow(-1));
  EXPECT_THROW((x() + y()).pow(-1), std::domain_error);
}

TEST(Expr, SymbolsAreSorted) {
  const auto syms = (yt() * x() + y()).symbols();
  ASSERT_EQ(syms.size(), 3u);
  EXPECT_EQ(syms[0], Symbol::base(0));
  EXPECT_EQ(syms[1], Symbol::jet(0, MultiIndex{}));
  EXPECT_EQ(syms[2], Symbol::jet(0, MultiIndex({0})));
}

TEST(Expr, NormalizeIsIdentity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto spec = testing::scalar_chart(2, 2, 2);
    const Expr e = testing::random_polynomial(*spec, 2, rng);
    EXPECT_EQ(normalize(e), e);
  }
}

TEST(ExprProperty, RingAxiomsHoldOnRandomPolynomials) {
  std::mt19937_64 rng(12);
  auto spec = testing::scalar_chart(2, 2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const Expr a = testing::random_polynomial(*spec, 2, rng);
    const Expr b = testing::random_polynomial(*spec, 2, rng);
    const Expr c = testing::random_polynomial(*spec, 2, rng);
    EXPECT_EQ(a + b, b + a);
    EXPECT_EQ(a * b, b * a);
    EXPECT_EQ((a + b) + c, a + (b + c));
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_TRUE((a - a).is_zero());
    EXPECT_EQ(-(-a), a);
  }
}

TEST(ExprProperty, ArithmeticCommutesWithEvaluation) {
  std::mt19937_64 rng(13);
  auto spec = testing::scalar_chart(2, 2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const Expr a = testing::random_polynomial(*spec, 2, rng);
    const Expr b = testing::random_polynomial(*spec, 2, rng);
    const JetPoint p = testing::random_point(*spec, 2, rng, {});
    const double va = testing::evaluate(a, p);
    const double vb = testing::evaluate(b, p);
    EXPECT_NEAR(testing::evaluate(a * b, p), va * vb, 1e-9 * (1 + std::abs(va * vb)));
    EXPECT_NEAR(testing::evaluate(a - b, p), va - vb, 1e-12 * (1 + std::abs(va) + std::abs(vb)));
  }
}

}  // namespace
}  // namespace varcomp
