#include "anmvae/mechanism/expr.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include "anmvae/errors.hpp"

namespace anmvae::mech {
namespace {

std::shared_ptr<const ExprNode> make(NodeKind kind, double value,
                                     std::vector<std::shared_ptr<const ExprNode>> args) {
  return std::make_shared<const ExprNode>(ExprNode{kind, value, std::move(args)});
}

Dual pow_dual(Dual base, Dual exponent) {
  const double value = std::pow(base.value, exponent.value);
  if (base.value == 0.0 && exponent.value < 0.0) {
    throw NumericalDomainError("0 raised to a negative power", exponent.value);
  }
  if (std::isnan(value)) {
    throw NumericalDomainError("negative base with non-integer exponent", base.value);
  }
  if (exponent.deriv == 0.0) {
    if (base.deriv == 0.0) {
      return {value, 0.0};
    }
    return {value, exponent.value * std::pow(base.value, exponent.value - 1.0) * base.deriv};
  }
  if (!(base.value > 0.0)) {
    throw NumericalDomainError("t-dependent exponent requires a positive base", base.value);
  }
  return {value, value * (exponent.deriv * std::log(base.value) +
                          exponent.value * base.deriv / base.value)};
}

Dual eval_node(const ExprNode& n, double t) {
  switch (n.kind) {
    case NodeKind::Constant:
      return Dual::constant(n.value);
    case NodeKind::Variable:
      return Dual::variable(t);
    case NodeKind::Pi:
      return Dual::constant(std::numbers::pi);
    case NodeKind::Neg:
      return -eval_node(*n.args[0], t);
    case NodeKind::Cos:
      return cos(eval_node(*n.args[0], t));
    case NodeKind::Sin:
      return sin(eval_node(*n.args[0], t));
    case NodeKind::Exp:
      return exp(eval_node(*n.args[0], t));
    case NodeKind::Add:
      return eval_node(*n.args[0], t) + eval_node(*n.args[1], t);
    case NodeKind::Sub:
      return eval_node(*n.args[0], t) - eval_node(*n.args[1], t);
    case NodeKind::Mul:
      return eval_node(*n.args[0], t) * eval_node(*n.args[1], t);
    case NodeKind::Div: {
      const Dual a = eval_node(*n.args[0], t);
      const Dual b = eval_node(*n.args[1], t);
      if (b.value == 0.0) {
        throw NumericalDomainError("division by zero", a.value);
      }
      return a / b;
    }
    case NodeKind::Pow:
      return pow_dual(eval_node(*n.args[0], t), eval_node(*n.args[1], t));
    case NodeKind::Max: {
      const Dual a = eval_node(*n.args[0], t);
      const Dual b = eval_node(*n.args[1], t);
      return a.value >= b.value ? a : b;
    }
    case NodeKind::GaussPdf: {
      const Dual x = eval_node(*n.args[0], t);
      const Dual mu = eval_node(*n.args[1], t);
      const Dual sigma = eval_node(*n.args[2], t);
      if (!(sigma.value > 0.0)) {
        throw NumericalDomainError("gausspdf sigma must be positive", sigma.value);
      }
      const Dual z = (x - mu) / sigma;
      const Dual norm = sigma * Dual::constant(std::sqrt(2.0 * std::numbers::pi));
      return exp(Dual::constant(-0.5) * z * z) / norm;
    }
  }
  throw ConfigError("unknown expression node");
}

int precedence(NodeKind k) {
  switch (k) {
    case NodeKind::Add:
    case NodeKind::Sub:
      return 1;
    case NodeKind::Mul:
    case NodeKind::Div:
      return 2;
    case NodeKind::Neg:
      return 3;
    case NodeKind::Pow:
      return 4;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void print(const ExprNode& n, std::string& out);

void print_wrapped(const ExprNode& n, bool parens, std::string& out) {
  if (parens) {
    out += '(';
  }
  print(n, out);
  if (parens) {
    out += ')';
  }
}

void print_call(const char* name, const ExprNode& n, std::string& out) {
  out += name;
  out += '(';
  for (std::size_t i = 0; i < n.args.size(); ++i) {
    if (i > 0) {
      out += ", ";
    }
    print(*n.args[i], out);
  }
  out += ')';
}

void print(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Constant:
      if (n.value < 0.0 || std::signbit(n.value)) {
        out += "(" + format_number(n.value) + ")";
      } else {
        out += format_number(n.value);
      }
      return;
    case NodeKind::Variable:
      out += 't';
      return;
    case NodeKind::Pi:
      out += "pi";
      return;
    case NodeKind::Neg:
      out += '-';
      print_wrapped(*n.args[0], precedence(n.args[0]->kind) < 3, out);
      return;
    case NodeKind::Cos:
      print_call("cos", n, out);
      return;
    case NodeKind::Sin:
      print_call("sin", n, out);
      return;
    case NodeKind::Exp:
      print_call("exp", n, out);
      return;
    case NodeKind::Max:
      print_call("max", n, out);
      return;
    case NodeKind::GaussPdf:
      print_call("gausspdf", n, out);
      return;
    case NodeKind::Pow:
      print_wrapped(*n.args[0], precedence(n.args[0]->kind) < 5, out);
      out += '^';
      print_wrapped(*n.args[1], precedence(n.args[1]->kind) < 3, out);
      return;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
      const int p = precedence(n.kind);
      static constexpr const char* kOps[] = {" + ", " - ", " * ", " / "};
      const int op = static_cast<int>(n.kind) - static_cast<int>(NodeKind::Add);
      print_wrapped(*n.args[0], precedence(n.args[0]->kind) < p, out);
      out += kOps[op];
      print_wrapped(*n.args[1], precedence(n.args[1]->kind) <= p, out);
      return;
    }
  }
}

}  // namespace

MechanismExpr MechanismExpr::constant(double v) {
  return MechanismExpr(make(NodeKind::Constant, v, {}));
}
MechanismExpr MechanismExpr::variable() { return MechanismExpr(make(NodeKind::Variable, 0.0, {})); }
MechanismExpr MechanismExpr::pi() { return MechanismExpr(make(NodeKind::Pi, 0.0, {})); }

MechanismExpr MechanismExpr::unary(NodeKind kind, const MechanismExpr& a) {
  return MechanismExpr(make(kind, 0.0, {a.root_}));
}

MechanismExpr MechanismExpr::binary(NodeKind kind, const MechanismExpr& a, const MechanismExpr& b) {
  return MechanismExpr(make(kind, 0.0, {a.root_, b.root_}));
}

MechanismExpr MechanismExpr::gausspdf(const MechanismExpr& x, const MechanismExpr& mu,
                                      const MechanismExpr& sigma) {
  return MechanismExpr(make(NodeKind::GaussPdf, 0.0, {x.root_, mu.root_, sigma.root_}));
}

Dual MechanismExpr::eval_dual(double t0) const {
  if (!root_) {
    throw ConfigError("evaluating an empty mechanism");
  }
  return eval_node(*root_, t0);
}

std::string MechanismExpr::to_string() const {
  std::string out;
  if (root_) {
    print(*root_, out);
  }
  return out;
}

bool operator==(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) {
    return false;
  }
  if (a.kind == NodeKind::Constant && a.value != b.value) {
    return false;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!(*a.args[i] == *b.args[i])) {
      return false;
    }
  }
  return true;
}

bool operator==(const MechanismExpr& a, const MechanismExpr& b) {
  if (!a.root_ || !b.root_) {
    return a.root_ == b.root_;
  }
  return *a.root_ == *b.root_;
}

}  // namespace anmvae::mech
