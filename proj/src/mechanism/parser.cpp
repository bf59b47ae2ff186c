#include "anmvae/mechanism/parser.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <vector>

#include "anmvae/errors.hpp"

namespace anmvae::mech {
namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  MechanismExpr parse_all() {
    MechanismExpr e = expr();
    skip_space();
    if (pos_ < text_.size()) {
      fail({"operator", "end of input"});
    }
    return e;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected) {
    std::string msg = "syntax error at offset " + std::to_string(pos_) + ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      msg += (i == 0 ? "" : i + 1 == expected.size() ? " or " : ", ") + expected[i];
    }
    if (pos_ < text_.size()) {
      msg += " but found '" + std::string(1, text_[pos_]) + "'";
    } else {
      msg += " but reached end of input";
    }
    throw ParseError(msg, pos_, std::move(expected));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, std::vector<std::string> expected) {
    if (!accept(c)) {
      fail(std::move(expected));
    }
  }

  MechanismExpr expr() {
    MechanismExpr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = MechanismExpr::binary(NodeKind::Add, lhs, term());
      } else if (accept('-')) {
        lhs = MechanismExpr::binary(NodeKind::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  MechanismExpr term() {
    MechanismExpr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = MechanismExpr::binary(NodeKind::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = MechanismExpr::binary(NodeKind::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  MechanismExpr unary() {
    if (accept('-')) {
      return MechanismExpr::unary(NodeKind::Neg, unary());
    }
    return power();
  }

  MechanismExpr power() {
    MechanismExpr base = primary();
    if (accept('^')) {
      return MechanismExpr::binary(NodeKind::Pow, base, unary());
    }
    return base;
  }

  MechanismExpr primary() {
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      const std::string name = identifier();
      if (name == "t") {
        return MechanismExpr::variable();
      }
      if (name == "pi") {
        return MechanismExpr::pi();
      }
      return call(name, start);
    }
    if (accept('(')) {
      MechanismExpr inner = expr();
      expect(')', {"')'", "operator"});
      return inner;
    }
    fail({"number", "'t'", "'pi'", "function call", "'('", "'-'"});
  }

  MechanismExpr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        ++pos_;
      }
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_) {
      pos_ = start;
      fail({"number"});
    }
    return MechanismExpr::constant(value);
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::vector<MechanismExpr> arguments(std::size_t count) {
    expect('(', {"'('"});
    std::vector<MechanismExpr> args;
    for (std::size_t i = 0; i < count; ++i) {
      if (i > 0 && !accept(',') && !accept(';')) {
        fail({"','", "';'", "operator"});
      }
      args.push_back(expr());
    }
    expect(')', {"')'", "operator"});
    return args;
  }

  MechanismExpr call(const std::string& name, std::size_t start) {
    if (name == "cos" || name == "sin" || name == "exp") {
      const NodeKind k = name == "cos" ? NodeKind::Cos : name == "sin" ? NodeKind::Sin : NodeKind::Exp;
      return MechanismExpr::unary(k, arguments(1)[0]);
    }
    if (name == "max") {
      auto a = arguments(2);
      return MechanismExpr::binary(NodeKind::Max, a[0], a[1]);
    }
    if (name == "gausspdf") {
      auto a = arguments(3);
      return MechanismExpr::gausspdf(a[0], a[1], a[2]);
    }
    pos_ = start;
    fail({"'t'", "'pi'", "cos", "sin", "exp", "max", "gausspdf"});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

MechanismExpr parse(std::string_view text) { return Parser(text).parse_all(); }

}  // namespace anmvae::mech
