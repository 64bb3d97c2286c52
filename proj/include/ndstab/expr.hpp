#pragma once

// Closed expression grammar for coefficients and delay arguments.
//
// JSON form is a nested array: ["const", c], ["t"], ["param", "r"],
// ["+", e...], ["-", e1, e2], ["*", e...], ["/", num, den], ["sin", e],
// ["cos", e], ["abs", e], ["scale", c, e]. A bare number is accepted as a
// constant on input; output always uses the array form.

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ndstab/errors.hpp"

namespace ndstab {

using json = nlohmann::json;

enum class ExprKind {
  Constant,
  Time,
  Param,
  Sum,
  Difference,
  Product,
  Quotient,
  Sine,
  Cosine,
  Abs,
  Scale,
};

/// Immutable expression tree; copies share nodes.
class Expr {
 public:
  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double c) { return Expr(make(ExprKind::Constant, c, {}, {})); }
  static Expr time() { return Expr(make(ExprKind::Time, 0.0, {}, {})); }
  static Expr param(std::string name) { return Expr(make(ExprKind::Param, 0.0, std::move(name), {})); }
  static Expr sum(std::vector<Expr> terms) { return nary(ExprKind::Sum, std::move(terms)); }
  static Expr product(std::vector<Expr> factors) { return nary(ExprKind::Product, std::move(factors)); }
  static Expr difference(Expr lhs, Expr rhs) {
    return Expr(make(ExprKind::Difference, 0.0, {}, {std::move(lhs), std::move(rhs)}));
  }
  static Expr quotient(Expr num, Expr den) {
    return Expr(make(ExprKind::Quotient, 0.0, {}, {std::move(num), std::move(den)}));
  }
  static Expr sin(Expr e) { return Expr(make(ExprKind::Sine, 0.0, {}, {std::move(e)})); }
  static Expr cos(Expr e) { return Expr(make(ExprKind::Cosine, 0.0, {}, {std::move(e)})); }
  static Expr abs(Expr e) { return Expr(make(ExprKind::Abs, 0.0, {}, {std::move(e)})); }
  static Expr scale(double c, Expr e) { return Expr(make(ExprKind::Scale, c, {}, {std::move(e)})); }

  [[nodiscard]] ExprKind kind() const { return node_->kind; }
  /// Constant value, or the factor of a Scale node.
  [[nodiscard]] double value() const { return node_->value; }
  [[nodiscard]] const std::string& name() const { return node_->name; }
  [[nodiscard]] const std::vector<Expr>& children() const { return node_->children; }

  /// Evaluates at time t. Throws DomainError on a zero denominator, a
  /// non-finite result or an unbound parameter.
  [[nodiscard]] double operator()(double t) const { return eval_node(*node_, t); }

  /// Replaces every `param` node called `name` by a constant.
  [[nodiscard]] Expr bind(std::string_view name, double v) const {
    const Node& n = *node_;
    if (n.kind == ExprKind::Param) {
      return n.name == name ? constant(v) : *this;
    }
    if (n.children.empty()) return *this;
    std::vector<Expr> kids;
    kids.reserve(n.children.size());
    for (const auto& c : n.children) kids.push_back(c.bind(name, v));
    return Expr(make(n.kind, n.value, n.name, std::move(kids)));
  }

  [[nodiscard]] bool has_params() const {
    if (node_->kind == ExprKind::Param) return true;
    for (const auto& c : node_->children) {
      if (c.has_params()) return true;
    }
    return false;
  }

  [[nodiscard]] bool depends_on_time() const {
    if (node_->kind == ExprKind::Time) return true;
    for (const auto& c : node_->children) {
      if (c.depends_on_time()) return true;
    }
    return false;
  }

  /// Every quotient denominator in the tree, outermost first.
  [[nodiscard]] std::vector<Expr> denominators() const {
    std::vector<Expr> out;
    collect_denominators(out);
    return out;
  }

  friend bool operator==(const Expr& lhs, const Expr& rhs) {
    if (lhs.node_ == rhs.node_) return true;
    const Node& a = *lhs.node_;
    const Node& b = *rhs.node_;
    if (a.kind != b.kind || a.name != b.name || a.children.size() != b.children.size()) return false;
    if (!(a.value == b.value) && !(std::isnan(a.value) && std::isnan(b.value))) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i) {
      if (!(a.children[i] == b.children[i])) return false;
    }
    return true;
  }

 private:
  struct Node {
    ExprKind kind;
    double value;
    std::string name;
    std::vector<Expr> children;
  };

  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static std::shared_ptr<const Node> make(ExprKind k, double v, std::string name, std::vector<Expr> kids) {
    return std::make_shared<const Node>(Node{k, v, std::move(name), std::move(kids)});
  }

  static Expr nary(ExprKind k, std::vector<Expr> kids) {
    if (kids.empty()) throw SpecError("n-ary expression needs at least one operand");
    return Expr(make(k, 0.0, {}, std::move(kids)));
  }

  void collect_denominators(std::vector<Expr>& out) const {
    if (node_->kind == ExprKind::Quotient) out.push_back(node_->children[1]);
    for (const auto& c : node_->children) c.collect_denominators(out);
  }

  static double eval_node(const Node& n, double t) {
    switch (n.kind) {
      case ExprKind::Constant:
        return n.value;
      case ExprKind::Time:
        return t;
      case ExprKind::Param:
        throw DomainError("unbound parameter '" + n.name + "'");
      case ExprKind::Sum: {
        double s = 0.0;
        for (const auto& c : n.children) s += eval_node(*c.node_, t);
        return s;
      }
      case ExprKind::Difference:
        return eval_node(*n.children[0].node_, t) - eval_node(*n.children[1].node_, t);
      case ExprKind::Product: {
        double p = 1.0;
        for (const auto& c : n.children) p *= eval_node(*c.node_, t);
        return p;
      }
      case ExprKind::Quotient: {
        const double den = eval_node(*n.children[1].node_, t);
        if (den == 0.0) throw DomainError("division by zero at t = " + std::to_string(t));
        const double q = eval_node(*n.children[0].node_, t) / den;
        if (!std::isfinite(q)) throw DomainError("non-finite quotient at t = " + std::to_string(t));
        return q;
      }
      case ExprKind::Sine:
        return std::sin(eval_node(*n.children[0].node_, t));
      case ExprKind::Cosine:
        return std::cos(eval_node(*n.children[0].node_, t));
      case ExprKind::Abs:
        return std::fabs(eval_node(*n.children[0].node_, t));
      case ExprKind::Scale:
        return n.value * eval_node(*n.children[0].node_, t);
    }
    return 0.0;
  }

  std::shared_ptr<const Node> node_;
};

[[nodiscard]] inline double eval(const Expr& e, double t) { return e(t); }

inline Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr::difference(a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::product({a, b}); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::quotient(a, b); }
inline Expr operator*(double c, const Expr& e) { return Expr::scale(c, e); }

namespace detail {

inline const char* op_name(ExprKind k) {
  switch (k) {
    case ExprKind::Constant: return "const";
    case ExprKind::Time: return "t";
    case ExprKind::Param: return "param";
    case ExprKind::Sum: return "+";
    case ExprKind::Difference: return "-";
    case ExprKind::Product: return "*";
    case ExprKind::Quotient: return "/";
    case ExprKind::Sine: return "sin";
    case ExprKind::Cosine: return "cos";
    case ExprKind::Abs: return "abs";
    case ExprKind::Scale: return "scale";
  }
  return "?";
}

inline void expect_arity(const json& j, std::size_t n, const std::string& op) {
  if (j.size() != n + 1) {
    throw SpecError("'" + op + "' expects " + std::to_string(n) + " operand(s), got " + std::to_string(j.size() - 1));
  }
}

}  // namespace detail

inline json to_json(const Expr& e) {
  json out = json::array({detail::op_name(e.kind())});
  switch (e.kind()) {
    case ExprKind::Constant:
      out.push_back(e.value());
      break;
    case ExprKind::Time:
      break;
    case ExprKind::Param:
      out.push_back(e.name());
      break;
    case ExprKind::Scale:
      out.push_back(e.value());
      out.push_back(to_json(e.children()[0]));
      break;
    default:
      for (const auto& c : e.children()) out.push_back(to_json(c));
      break;
  }
  return out;
}

inline Expr expr_from_json(const json& j) {
  if (j.is_number()) return Expr::constant(j.get<double>());
  if (!j.is_array() || j.empty() || !j[0].is_string()) {
    throw SpecError("expression must be a number or an array headed by an operator name: " + j.dump());
  }
  const std::string op = j[0].get<std::string>();
  auto operands = [&](std::size_t min_count) {
    if (j.size() < min_count + 1) throw SpecError("'" + op + "' needs at least " + std::to_string(min_count) + " operand(s)");
    std::vector<Expr> kids;
    for (std::size_t i = 1; i < j.size(); ++i) kids.push_back(expr_from_json(j[i]));
    return kids;
  };
  if (op == "const") {
    detail::expect_arity(j, 1, op);
    if (!j[1].is_number()) throw SpecError("'const' operand must be a number");
    return Expr::constant(j[1].get<double>());
  }
  if (op == "t") {
    detail::expect_arity(j, 0, op);
    return Expr::time();
  }
  if (op == "param") {
    detail::expect_arity(j, 1, op);
    if (!j[1].is_string()) throw SpecError("'param' operand must be a name");
    return Expr::param(j[1].get<std::string>());
  }
  if (op == "+") return Expr::sum(operands(1));
  if (op == "*") return Expr::product(operands(1));
  if (op == "-") {
    detail::expect_arity(j, 2, op);
    return Expr::difference(expr_from_json(j[1]), expr_from_json(j[2]));
  }
  if (op == "/") {
    detail::expect_arity(j, 2, op);
    return Expr::quotient(expr_from_json(j[1]), expr_from_json(j[2]));
  }
  if (op == "sin" || op == "cos" || op == "abs") {
    detail::expect_arity(j, 1, op);
    Expr arg = expr_from_json(j[1]);
    if (op == "sin") return Expr::sin(arg);
    if (op == "cos") return Expr::cos(arg);
    return Expr::abs(arg);
  }
  if (op == "scale") {
    detail::expect_arity(j, 2, op);
    if (!j[1].is_number()) throw SpecError("'scale' factor must be a number");
    return Expr::scale(j[1].get<double>(), expr_from_json(j[2]));
  }
  throw SpecError("unknown operator '" + op + "'");
}

}  // namespace ndstab
