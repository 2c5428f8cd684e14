#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rpe {

/// Immutable scalar expression over a vector of variables.
///
/// Payoffs u(a, tau) are expressions over the K coordinates of tau; edge costs
/// are expressions over the single load variable x. Supported nodes: numeric
/// constants, variable references, + - * / (division by constants only),
/// n-ary min/max, and piecewise-by-threshold on a selector expression.
class Expr {
 public:
  enum class Kind { Constant, Variable, Neg, Add, Sub, Mul, Div, Min, Max, Piecewise };

  Expr();  // the constant 0

  static Expr constant(double value);
  static Expr variable(std::size_t index);
  static Expr neg(Expr operand);
  static Expr add(Expr lhs, Expr rhs);
  static Expr sub(Expr lhs, Expr rhs);
  static Expr mul(Expr lhs, Expr rhs);
  /// Throws PreconditionError unless `rhs` is a nonzero constant.
  static Expr div(Expr lhs, Expr rhs);
  static Expr min(std::vector<Expr> args);
  static Expr max(std::vector<Expr> args);
  /// Branch i applies when thresholds[i] <= selector < thresholds[i+1]; the
  /// first branch also covers selector values below thresholds[0].
  static Expr piecewise(Expr selector, std::vector<double> thresholds,
                        std::vector<Expr> branches);

  Kind kind() const;
  double value() const;         // Constant
  std::size_t index() const;    // Variable
  std::span<const Expr> children() const;
  /// Piecewise: children()[0] is the selector, children()[1..] the branches.
  std::span<const double> thresholds() const;

  double eval(std::span<const double> vars) const;

  bool is_constant() const;
  /// Sorted, de-duplicated variable indices this expression reads.
  std::vector<std::size_t> variables() const;

  /// If the expression is a sum of distinct variables, their sorted indices.
  std::optional<std::vector<std::size_t>> as_variable_sum() const;

  /// If every variable-dependent maximal subexpression is the same sum of
  /// variables S, returns S (empty when the expression is constant). Such an
  /// expression is a function of sum_{k in S} vars[k] alone.
  std::optional<std::vector<std::size_t>> single_sum_support() const;

  /// Splits top-level sums, differences, negations, and constant scalings
  /// into (coefficient, term) pairs whose weighted sum equals *this.
  std::vector<std::pair<double, Expr>> additive_terms() const;

  /// Expressions whose sign changes mark the kinks and jumps of *this: lhs-rhs
  /// for every min/max pair and selector-threshold for every piecewise cut.
  std::vector<Expr> switch_functions() const;

  /// Replaces variable i by replacements[i].
  Expr substitute(std::span<const Expr> replacements) const;

  /// Renders in the parser grammar. `name` maps a variable index to its
  /// source spelling (e.g. "tau(a)" or "x").
  std::string to_string(const std::function<std::string(std::size_t)>& name) const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  static Expr compound(Kind kind, std::vector<Expr> children,
                       std::vector<double> thresholds = {});
  std::shared_ptr<const Node> node_;
};

/// Resolves the variable references the parser meets. `call` handles the
/// form `fn(arg)` (e.g. `tau(a)`), `ident` a bare identifier (e.g. `x`).
struct VariableResolver {
  std::function<std::optional<std::size_t>(std::string_view fn,
                                           std::string_view arg)>
      call;
  std::function<std::optional<std::size_t>(std::string_view ident)> ident;
};

/// Parses the payoff/cost expression grammar:
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | primary
///   primary := number | '(' expr ')' | min(expr, expr, ...) | max(...)
///            | piecewise(expr; t0: expr, t1: expr, ...) | ref
///
/// `context` prefixes error messages (file and field).
Expr parse_expression(std::string_view text, const VariableResolver& resolver,
                      const std::string& context = {});

/// Resolver for one-variable cost functions written in `x`.
VariableResolver load_variable_resolver();

/// Probe points for a continuity check: vectors at which `selector` equals
/// `threshold`.
using ContinuityProbe = std::function<std::vector<std::vector<double>>(
    const Expr& selector, double threshold)>;

/// Compares adjacent piecewise branches at each interior breakpoint on the
/// probe points. Returns a description of the first jump larger than tol.
std::optional<std::string> find_discontinuity(const Expr& e, const ContinuityProbe& probes,
                                              double tol = 1e-9);

/// Roots in (lo, hi) of a function that is continuous between jumps, located
/// by sign changes on a uniform grid and refined by bisection.
std::vector<double> sign_change_points(const std::function<double(double)>& f,
                                       double lo, double hi,
                                       std::size_t grid = 2048);

}  // namespace rpe
