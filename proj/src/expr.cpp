#include "rpe/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iterator>
#include <limits>
#include <stdexcept>

#include "rpe/errors.hpp"

namespace rpe {

struct Expr::Node {
  Kind kind = Kind::Constant;
  double value = 0.0;
  std::size_t index = 0;
  std::vector<Expr> children;
  std::vector<double> thresholds;
  std::vector<std::size_t> vars;  // sorted
};

namespace {

std::vector<std::size_t> merge_sorted(const std::vector<std::size_t>& a,
                                      const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

Expr::Expr() : Expr(constant(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->index = index;
  n->vars = {index};
  return Expr(std::move(n));
}

Expr Expr::neg(Expr operand) {
  if (operand.kind() == Kind::Constant) return constant(-operand.value());
  auto n = std::make_shared<Node>();
  n->kind = Kind::Neg;
  n->vars = operand.node_->vars;
  n->children = {std::move(operand)};
  return Expr(std::move(n));
}

#define RPE_BINARY(NAME, KIND, FOLD)                                      \
  Expr Expr::NAME(Expr lhs, Expr rhs) {                                   \
    if (lhs.kind() == Kind::Constant && rhs.kind() == Kind::Constant) {   \
      const double a = lhs.value();                                       \
      const double b = rhs.value();                                       \
      return constant(FOLD);                                              \
    }                                                                     \
    auto n = std::make_shared<Node>();                                    \
    n->kind = KIND;                                                       \
    n->vars = merge_sorted(lhs.node_->vars, rhs.node_->vars);             \
    n->children = {std::move(lhs), std::move(rhs)};                       \
    return Expr(std::move(n));                                            \
  }

RPE_BINARY(add, Kind::Add, a + b)
RPE_BINARY(sub, Kind::Sub, a - b)
RPE_BINARY(mul, Kind::Mul, a * b)
#undef RPE_BINARY

Expr Expr::div(Expr lhs, Expr rhs) {
  if (rhs.kind() != Kind::Constant) {
    throw PreconditionError("division is only supported by constants");
  }
  if (rhs.value() == 0.0) throw PreconditionError("division by zero");
  if (lhs.kind() == Kind::Constant) return constant(lhs.value() / rhs.value());
  auto n = std::make_shared<Node>();
  n->kind = Kind::Div;
  n->vars = lhs.node_->vars;
  n->children = {std::move(lhs), std::move(rhs)};
  return Expr(std::move(n));
}

Expr Expr::compound(Kind kind, std::vector<Expr> children,
                    std::vector<double> thresholds) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  for (const Expr& c : children) n->vars = merge_sorted(n->vars, c.node_->vars);
  n->children = std::move(children);
  n->thresholds = std::move(thresholds);
  return Expr(std::move(n));
}

Expr Expr::min(std::vector<Expr> args) {
  if (args.size() < 2) throw PreconditionError("min needs at least two arguments");
  return compound(Kind::Min, std::move(args));
}

Expr Expr::max(std::vector<Expr> args) {
  if (args.size() < 2) throw PreconditionError("max needs at least two arguments");
  return compound(Kind::Max, std::move(args));
}

Expr Expr::piecewise(Expr selector, std::vector<double> thresholds,
                     std::vector<Expr> branches) {
  if (thresholds.empty() || thresholds.size() != branches.size()) {
    throw PreconditionError("piecewise: need one branch per threshold");
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!std::isfinite(thresholds[i])) {
      throw PreconditionError("piecewise: non-finite threshold");
    }
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
      throw PreconditionError("piecewise: thresholds must be strictly increasing");
    }
  }
  std::vector<Expr> children;
  children.reserve(branches.size() + 1);
  children.push_back(std::move(selector));
  for (Expr& b : branches) children.push_back(std::move(b));
  return compound(Kind::Piecewise, std::move(children), std::move(thresholds));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
std::size_t Expr::index() const { return node_->index; }
std::span<const Expr> Expr::children() const { return node_->children; }
std::span<const double> Expr::thresholds() const { return node_->thresholds; }

double Expr::eval(std::span<const double> vars) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant:
      return n.value;
    case Kind::Variable:
      return vars[n.index];
    case Kind::Neg:
      return -n.children[0].eval(vars);
    case Kind::Add:
      return n.children[0].eval(vars) + n.children[1].eval(vars);
    case Kind::Sub:
      return n.children[0].eval(vars) - n.children[1].eval(vars);
    case Kind::Mul:
      return n.children[0].eval(vars) * n.children[1].eval(vars);
    case Kind::Div:
      return n.children[0].eval(vars) / n.children[1].eval(vars);
    case Kind::Min: {
      double best = std::numeric_limits<double>::infinity();
      for (const Expr& c : n.children) best = std::min(best, c.eval(vars));
      return best;
    }
    case Kind::Max: {
      double best = -std::numeric_limits<double>::infinity();
      for (const Expr& c : n.children) best = std::max(best, c.eval(vars));
      return best;
    }
    case Kind::Piecewise: {
      const double s = n.children[0].eval(vars);
      std::size_t branch = 0;
      for (std::size_t i = 1; i < n.thresholds.size(); ++i) {
        if (s >= n.thresholds[i]) branch = i;
      }
      return n.children[branch + 1].eval(vars);
    }
  }
  return 0.0;
}

bool Expr::is_constant() const { return node_->vars.empty(); }

std::vector<std::size_t> Expr::variables() const { return node_->vars; }

std::optional<std::vector<std::size_t>> Expr::as_variable_sum() const {
  const Node& n = *node_;
  if (n.kind == Kind::Variable) return std::vector<std::size_t>{n.index};
  if (n.kind != Kind::Add) return std::nullopt;
  auto lhs = n.children[0].as_variable_sum();
  auto rhs = n.children[1].as_variable_sum();
  if (!lhs || !rhs) return std::nullopt;
  std::vector<std::size_t> both;
  std::set_intersection(lhs->begin(), lhs->end(), rhs->begin(), rhs->end(),
                        std::back_inserter(both));
  if (!both.empty()) return std::nullopt;
  return merge_sorted(*lhs, *rhs);
}

namespace {

// Returns false when two different variable sums are found.
bool collect_sum_support(const Expr& e, std::optional<std::vector<std::size_t>>& found) {
  if (e.is_constant()) return true;
  if (auto s = e.as_variable_sum()) {
    if (found && *found != *s) return false;
    found = std::move(s);
    return true;
  }
  for (const Expr& c : e.children()) {
    if (!collect_sum_support(c, found)) return false;
  }
  return true;
}

void collect_terms(const Expr& e, double coeff,
                   std::vector<std::pair<double, Expr>>& out) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Constant:
      out.emplace_back(coeff * e.value(), Expr::constant(1.0));
      return;
    case K::Add:
      collect_terms(e.children()[0], coeff, out);
      collect_terms(e.children()[1], coeff, out);
      return;
    case K::Sub:
      collect_terms(e.children()[0], coeff, out);
      collect_terms(e.children()[1], -coeff, out);
      return;
    case K::Neg:
      collect_terms(e.children()[0], -coeff, out);
      return;
    case K::Mul:
      if (e.children()[0].kind() == K::Constant) {
        collect_terms(e.children()[1], coeff * e.children()[0].value(), out);
        return;
      }
      if (e.children()[1].kind() == K::Constant) {
        collect_terms(e.children()[0], coeff * e.children()[1].value(), out);
        return;
      }
      break;
    case K::Div:
      collect_terms(e.children()[0], coeff / e.children()[1].value(), out);
      return;
    default:
      break;
  }
  out.emplace_back(coeff, e);
}

void collect_switches(const Expr& e, std::vector<Expr>& out) {
  using K = Expr::Kind;
  if (e.is_constant()) return;
  if (e.kind() == K::Min || e.kind() == K::Max) {
    auto args = e.children();
    for (std::size_t i = 0; i < args.size(); ++i) {
      for (std::size_t j = i + 1; j < args.size(); ++j) {
        out.push_back(Expr::sub(args[i], args[j]));
      }
    }
  } else if (e.kind() == K::Piecewise) {
    for (std::size_t i = 1; i < e.thresholds().size(); ++i) {
      out.push_back(Expr::sub(e.children()[0], Expr::constant(e.thresholds()[i])));
    }
  }
  for (const Expr& c : e.children()) collect_switches(c, out);
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (v < 0) return "(" + s + ")";
  return s;
}

}  // namespace

std::optional<std::vector<std::size_t>> Expr::single_sum_support() const {
  std::optional<std::vector<std::size_t>> found;
  if (!collect_sum_support(*this, found)) return std::nullopt;
  return found ? *found : std::vector<std::size_t>{};
}

std::vector<std::pair<double, Expr>> Expr::additive_terms() const {
  std::vector<std::pair<double, Expr>> out;
  collect_terms(*this, 1.0, out);
  return out;
}

std::vector<Expr> Expr::switch_functions() const {
  std::vector<Expr> out;
  collect_switches(*this, out);
  return out;
}

Expr Expr::substitute(std::span<const Expr> replacements) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant:
      return *this;
    case Kind::Variable:
      if (n.index >= replacements.size()) {
        throw PreconditionError("substitute: variable index out of range");
      }
      return replacements[n.index];
    case Kind::Neg:
      return neg(n.children[0].substitute(replacements));
    case Kind::Add:
      return add(n.children[0].substitute(replacements),
                 n.children[1].substitute(replacements));
    case Kind::Sub:
      return sub(n.children[0].substitute(replacements),
                 n.children[1].substitute(replacements));
    case Kind::Mul:
      return mul(n.children[0].substitute(replacements),
                 n.children[1].substitute(replacements));
    case Kind::Div:
      return div(n.children[0].substitute(replacements), n.children[1]);
    case Kind::Min:
    case Kind::Max: {
      std::vector<Expr> args;
      for (const Expr& c : n.children) args.push_back(c.substitute(replacements));
      return n.kind == Kind::Min ? min(std::move(args)) : max(std::move(args));
    }
    case Kind::Piecewise: {
      std::vector<Expr> branches;
      for (std::size_t i = 1; i < n.children.size(); ++i) {
        branches.push_back(n.children[i].substitute(replacements));
      }
      return piecewise(n.children[0].substitute(replacements), n.thresholds,
                       std::move(branches));
    }
  }
  return *this;
}

std::string Expr::to_string(
    const std::function<std::string(std::size_t)>& name) const {
  const Node& n = *node_;
  auto child = [&](std::size_t i) { return n.children[i].to_string(name); };
  switch (n.kind) {
    case Kind::Constant:
      return format_number(n.value);
    case Kind::Variable:
      return name(n.index);
    case Kind::Neg:
      return "-(" + child(0) + ")";
    case Kind::Add:
      return "(" + child(0) + " + " + child(1) + ")";
    case Kind::Sub:
      return "(" + child(0) + " - " + child(1) + ")";
    case Kind::Mul:
      return child(0) + " * " + child(1);
    case Kind::Div:
      return "(" + child(0) + ") / " + child(1);
    case Kind::Min:
    case Kind::Max: {
      std::string s = n.kind == Kind::Min ? "min(" : "max(";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) s += ", ";
        s += child(i);
      }
      return s + ")";
    }
    case Kind::Piecewise: {
      std::string s = "piecewise(" + child(0) + "; ";
      for (std::size_t i = 0; i < n.thresholds.size(); ++i) {
        if (i) s += ", ";
        s += format_number(n.thresholds[i]) + ": " + child(i + 1);
      }
      return s + ")";
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(std::string_view text, const VariableResolver& resolver,
         const std::string& context)
      : text_(text), resolver_(resolver), context_(context) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    std::string where = context_.empty() ? "" : context_ + ", ";
    where += "column " + std::to_string(pos_ + 1);
    throw ParseError(where, message + " in \"" + std::string(text_) + "\"");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  // Wraps builder errors (division by non-constant, bad thresholds) with
  // position context.
  template <typename F>
  Expr build(F&& f) {
    try {
      return f();
    } catch (const PreconditionError& e) {
      fail(e.what());
    }
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        Expr rhs = term();
        lhs = Expr::add(std::move(lhs), std::move(rhs));
      } else if (accept('-')) {
        Expr rhs = term();
        lhs = Expr::sub(std::move(lhs), std::move(rhs));
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        Expr rhs = unary();
        lhs = Expr::mul(std::move(lhs), std::move(rhs));
      } else if (accept('/')) {
        Expr rhs = unary();
        lhs = build([&] { return Expr::div(lhs, rhs); });
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return Expr::neg(unary());
    if (accept('+')) return unary();
    return primary();
  }

  std::string_view identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  Expr number() {
    skip_ws();
    double v = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr == first) fail("malformed number");
    pos_ += static_cast<std::size_t>(res.ptr - first);
    return Expr::constant(v);
  }

  std::vector<Expr> argument_list() {
    std::vector<Expr> args;
    expect('(');
    args.push_back(expr());
    while (accept(',')) args.push_back(expr());
    expect(')');
    return args;
  }

  Expr piecewise_call() {
    expect('(');
    Expr selector = expr();
    expect(';');
    std::vector<double> thresholds;
    std::vector<Expr> branches;
    do {
      Expr t = expr();
      if (!t.is_constant()) fail("piecewise threshold must be a constant");
      thresholds.push_back(t.eval({}));
      expect(':');
      branches.push_back(expr());
    } while (accept(','));
    expect(')');
    return build([&] {
      return Expr::piecewise(std::move(selector), std::move(thresholds),
                             std::move(branches));
    });
  }

  Expr reference(std::string_view ident) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      const std::size_t close = text_.find(')', pos_);
      if (close == std::string_view::npos) fail("unterminated reference");
      std::string_view arg = text_.substr(pos_, close - pos_);
      while (!arg.empty() && std::isspace(static_cast<unsigned char>(arg.front()))) arg.remove_prefix(1);
      while (!arg.empty() && std::isspace(static_cast<unsigned char>(arg.back()))) arg.remove_suffix(1);
      std::optional<std::size_t> idx;
      if (resolver_.call) idx = resolver_.call(ident, arg);
      if (!idx) {
        fail("unknown reference " + std::string(ident) + "(" + std::string(arg) + ")");
      }
      pos_ = close + 1;
      return Expr::variable(*idx);
    }
    std::optional<std::size_t> idx;
    if (resolver_.ident) idx = resolver_.ident(ident);
    if (!idx) fail("unknown identifier '" + std::string(ident) + "'");
    return Expr::variable(*idx);
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      std::string_view ident = identifier();
      if (ident == "min" || ident == "max") {
        auto args = argument_list();
        if (args.size() < 2) {
          pos_ = start;
          fail(std::string(ident) + " needs at least two arguments");
        }
        return ident == "min" ? Expr::min(std::move(args)) : Expr::max(std::move(args));
      }
      if (ident == "piecewise") return piecewise_call();
      return reference(ident);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  const VariableResolver& resolver_;
  const std::string& context_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text, const VariableResolver& resolver,
                      const std::string& context) {
  return Parser(text, resolver, context).parse();
}

VariableResolver load_variable_resolver() {
  VariableResolver r;
  r.ident = [](std::string_view id) -> std::optional<std::size_t> {
    if (id == "x") return 0;
    return std::nullopt;
  };
  return r;
}

std::vector<double> sign_change_points(const std::function<double(double)>& f,
                                       double lo, double hi, std::size_t grid) {
  std::vector<double> roots;
  if (!(hi > lo) || grid < 1) return roots;
  const double step = (hi - lo) / static_cast<double>(grid);
  double x0 = lo;
  double f0 = f(x0);
  for (std::size_t i = 1; i <= grid; ++i) {
    const double x1 = i == grid ? hi : lo + step * static_cast<double>(i);
    const double f1 = f(x1);
    if (f1 == 0.0 && i < grid) {
      roots.push_back(x1);
    } else if ((f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0)) {
      double a = x0;
      double b = x1;
      double fa = f0;
      for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if ((fa < 0.0) == (fm < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    x0 = x1;
    f0 = f1;
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-14; }),
              roots.end());
  return roots;
}

}  // namespace rpe

namespace rpe {

std::optional<std::string> find_discontinuity(const Expr& e, const ContinuityProbe& probes,
                                              double tol) {
  if (e.kind() == Expr::Kind::Piecewise) {
    const Expr& selector = e.children()[0];
    auto th = e.thresholds();
    for (std::size_t i = 1; i < th.size(); ++i) {
      for (const auto& p : probes(selector, th[i])) {
        const double left = e.children()[i].eval(p);
        const double right = e.children()[i + 1].eval(p);
        if (std::abs(left - right) > tol * (1.0 + std::abs(left))) {
          return "jump at breakpoint " + std::to_string(th[i]) + " (" +
                 std::to_string(left) + " vs " + std::to_string(right) + ")";
        }
      }
    }
  }
  for (const Expr& c : e.children()) {
    if (auto msg = find_discontinuity(c, probes, tol)) return msg;
  }
  return std::nullopt;
}

}  // namespace rpe
