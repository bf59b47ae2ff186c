#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "anmvae/mechanism/dual.hpp"

namespace anmvae::mech {

enum class NodeKind {
  Constant,
  Variable,  // t
  Pi,
  Neg,
  Cos,
  Sin,
  Exp,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Max,
  GaussPdf,  // gausspdf(x, mu, sigma), sigma is a standard deviation
};

struct ExprNode {
  NodeKind kind;
  double value = 0.0;  // Constant only
  std::vector<std::shared_ptr<const ExprNode>> args;
};

/// Immutable parsed mechanism f(t). Cheap to copy; safe to evaluate from
/// several threads.
class MechanismExpr {
 public:
  MechanismExpr() = default;
  explicit MechanismExpr(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}

  static MechanismExpr constant(double v);
  static MechanismExpr variable();
  static MechanismExpr pi();
  static MechanismExpr unary(NodeKind kind, const MechanismExpr& a);
  static MechanismExpr binary(NodeKind kind, const MechanismExpr& a, const MechanismExpr& b);
  static MechanismExpr gausspdf(const MechanismExpr& x, const MechanismExpr& mu,
                                const MechanismExpr& sigma);

  bool empty() const noexcept { return root_ == nullptr; }
  const ExprNode& root() const { return *root_; }

  /// f(t0) and f'(t0). Throws NumericalDomainError on division by zero,
  /// 0 raised to a negative power, or non-positive gausspdf sigma.
  Dual eval_dual(double t0) const;
  double eval(double t) const { return eval_dual(t).value; }

  /// Canonical text form; parse(to_string()) reproduces an equal tree.
  std::string to_string() const;

  friend bool operator==(const MechanismExpr& a, const MechanismExpr& b);

 private:
  std::shared_ptr<const ExprNode> root_;
};

bool operator==(const ExprNode& a, const ExprNode& b);

}  // namespace anmvae::mech
