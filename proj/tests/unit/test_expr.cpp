#include <gtest/gtest.h>

#include <cmath>

#include "rpe/errors.hpp"
#include "rpe/expr.hpp"

using namespace rpe;

namespace {

VariableResolver abc() {
  VariableResolver r;
  r.call = [](std::string_view fn, std::string_view arg) -> std::optional<std::size_t> {
    if (fn != "tau" || arg.size() != 1 || arg[0] < 'a' || arg[0] > 'c') return std::nullopt;
    return static_cast<std::size_t>(arg[0] - 'a');
  };
  return r;
}

double ev(const std::string& s, std::vector<double> v) {
  return parse_expression(s, abc()).eval(v);
}

}  // namespace

TEST(Expr, Arithmetic) {
  EXPECT_DOUBLE_EQ(ev("1 + 2 * 3", {}), 7);
  EXPECT_DOUBLE_EQ(ev("-(1 - 4) / 2", {}), 1.5);
  EXPECT_DOUBLE_EQ(ev("-tau(c) - 1/3", {0, 0, 1.0 / 6}), -0.5);
  EXPECT_DOUBLE_EQ(ev("-max(tau(b), 1/2)", {0, 1, 0}), -1);
  EXPECT_DOUBLE_EQ(ev("min(tau(a), tau(b), 0.2)", {0.5, 0.3, 0.2}), 0.2);
}

TEST(Expr, Piecewise) {
  const std::string pw = "piecewise(tau(b); 0: -1, 0.2: 10*tau(b) - 3, 0.3: 0, 0.8: 5*tau(b) - 4)";
  EXPECT_DOUBLE_EQ(ev(pw, {0, 0.1, 0}), -1);
  EXPECT_NEAR(ev(pw, {0, 0.25, 0}), -0.5, 1e-15);
  EXPECT_DOUBLE_EQ(ev(pw, {0, 0.5, 0}), 0);
  EXPECT_DOUBLE_EQ(ev(pw, {0, 1, 0}), 1);
}

TEST(Expr, ParseErrorsCarryPosition) {
  try {
    parse_expression("1 + * 2", abc(), "game.json:u");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("game.json:u"), std::string::npos);
  }
  EXPECT_THROW(parse_expression("tau(z)", abc()), ParseError);
  EXPECT_THROW(parse_expression("tau(a) / tau(b)", abc()), Error);
  EXPECT_THROW(parse_expression("(1 + 2", abc()), ParseError);
}

TEST(Expr, Structure) {
  const auto e = parse_expression("2 * max(tau(a) + tau(c), 0.5) - 3", abc());
  const auto S = e.single_sum_support();
  ASSERT_TRUE(S.has_value());
  EXPECT_EQ(*S, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(e.variables(), (std::vector<std::size_t>{0, 2}));
  const auto mixed = parse_expression("tau(a) * tau(b)", abc());
  EXPECT_FALSE(mixed.single_sum_support().has_value());
  EXPECT_TRUE(parse_expression("1/2 + 1", abc()).is_constant());
  const auto sw = parse_expression("max(tau(b), 1/2)", abc()).switch_functions();
  ASSERT_EQ(sw.size(), 1u);
  EXPECT_NEAR(sw[0].eval(std::vector<double>{0, 0.5, 0.5}), 0.0, 1e-15);
}

TEST(Expr, RoundTripThroughText) {
  const auto e = parse_expression("piecewise(tau(c); 0: -1, 0.2: 10*tau(c) - 3) + max(tau(a), 0.25)",
                                  abc());
  const auto text = e.to_string([](std::size_t i) { return "tau(" + std::string(1, char('a' + i)) + ")"; });
  const auto back = parse_expression(text, abc());
  for (double c : {0.0, 0.1, 0.2, 0.25, 0.9}) {
    const std::vector<double> v{0.3, 0.7 - c, c};
    EXPECT_DOUBLE_EQ(e.eval(v), back.eval(v));
  }
}

TEST(Expr, DiscontinuityDetected) {
  const auto jump = parse_expression("piecewise(tau(a); 0: 0, 0.5: 1)", abc());
  const ContinuityProbe probe = [](const Expr&, double t) {
    return std::vector<std::vector<double>>{{t, 1 - t, 0}};
  };
  EXPECT_TRUE(find_discontinuity(jump, probe).has_value());
  const auto ok = parse_expression("piecewise(tau(a); 0: 0, 0.5: tau(a) - 0.5)", abc());
  EXPECT_FALSE(find_discontinuity(ok, probe).has_value());
}

TEST(Expr, SignChangePoints) {
  const auto r = sign_change_points([](double x) { return x - 0.3; }, 0, 1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0], 0.3, 1e-12);
}
