#include <gtest/gtest.h>

#include "amort/resource.hpp"

using namespace amort;

TEST(Rational, ParsesIntegersAndFractions) {
  EXPECT_EQ(parse_rational("17"), 17);
  EXPECT_EQ(parse_rational("-3"), -3);
  EXPECT_EQ(parse_rational("6/4"), Rational(3, 2));
  EXPECT_EQ(to_string(parse_rational("6/4")), "3/2");
  EXPECT_EQ(to_string(parse_rational("4/2")), "2");
}

TEST(Rational, RejectsMalformed) {
  EXPECT_THROW(parse_rational(""), std::invalid_argument);
  EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
  EXPECT_THROW(parse_rational("1/-2"), std::invalid_argument);
  EXPECT_THROW(parse_rational("x"), std::invalid_argument);
  EXPECT_THROW(parse_rational("1/"), std::invalid_argument);
}

TEST(ResourceValue, MonoidLaws) {
  ResourceValue a(Rational(1, 2)), b(3), e;
  EXPECT_EQ(combine(a, e), a);
  EXPECT_EQ(combine(a, b), combine(b, a));
  EXPECT_EQ(combine(combine(a, b), a), combine(a, combine(b, a)));
  EXPECT_TRUE(leq(e, a));
  EXPECT_TRUE(leq(a, combine(a, b)));
  EXPECT_FALSE(leq(b, a));
  EXPECT_EQ(ResourceValue::unit(), e);
}

TEST(ResourceValue, NegativeAmountsRejected) {
  EXPECT_THROW(ResourceValue(Rational(-1, 3)), std::invalid_argument);
}

TEST(ResourceValue, ResOfIntClampsNegatives) {
  EXPECT_EQ(res_of_int(4), ResourceValue(4));
  EXPECT_EQ(res_of_int(0), ResourceValue());
  EXPECT_EQ(res_of_int(-5), ResourceValue());
}

TEST(LinearExpr, Arithmetic) {
  LinearExpr e = LinearExpr::var("a", 2) + LinearExpr(Rational(1, 2));
  EXPECT_EQ(to_string(e), "2*$a + 1/2");
  LinearExpr d = e - LinearExpr::var("a", 2);
  EXPECT_TRUE(d.is_constant());
  EXPECT_EQ(d.constant(), Rational(1, 2));
  EXPECT_EQ(to_string(LinearExpr()), "0");
  EXPECT_EQ(to_string(LinearExpr::var("a") - LinearExpr::var("b") - 1), "$a - $b - 1");
  EXPECT_TRUE((LinearExpr::var("a") * 0).is_zero());
}

TEST(LinearExpr, Evaluate) {
  LinearExpr e = LinearExpr::var("a", 3) + LinearExpr::var("b") + 1;
  EXPECT_EQ(e.evaluate({{"a", 2}, {"b", Rational(1, 2)}}), Rational(15, 2));
  EXPECT_EQ(expr_eval(e, {{"a", 0}, {"b", 0}}), ResourceValue(1));
  EXPECT_THROW(e.evaluate({{"a", 1}}), UnboundMetavariable);
  try {
    e.evaluate({{"a", 1}});
  } catch (const UnboundMetavariable& u) {
    EXPECT_EQ(u.name(), "b");
  }
}

TEST(LinearExpr, NonnegativeForm) {
  EXPECT_TRUE((LinearExpr::var("a") + 2).is_nonnegative_form());
  EXPECT_FALSE((LinearExpr::var("a") - 2).is_nonnegative_form());
  EXPECT_FALSE(LinearExpr::var("a", -1).is_nonnegative_form());
  EXPECT_EQ((LinearExpr::var("a") + LinearExpr::var("b")).metavariables(), (std::set<std::string>{"a", "b"}));
}
