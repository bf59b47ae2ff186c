#pragma once

#include <string_view>

#include "anmvae/mechanism/expr.hpp"

namespace anmvae::mech {

/*
 * expr    ::= term { ("+" | "-") term }
 * term    ::= unary { ("*" | "/") unary }
 * unary   ::= "-" unary | power
 * power   ::= primary [ "^" unary ]
 * primary ::= number | "t" | "pi" | "(" expr ")" | call
 * call    ::= ("cos" | "sin" | "exp") "(" expr ")"
 *           | "max" "(" expr sep expr ")"
 *           | "gausspdf" "(" expr sep expr sep expr ")"
 * sep     ::= "," | ";"
 *
 * "^" binds tighter than unary minus, so -t^2 is -(t^2). The exponent may
 * itself carry a sign: 2^-t.
 */
MechanismExpr parse(std::string_view text);

}  // namespace anmvae::mech
