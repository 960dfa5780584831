#include "akm/expr.hpp"

#include <array>
#include <charconv>
#include <cctype>
#include <cmath>
#include <optional>
#include <vector>

#include "akm/errors.hpp"

namespace akm {

struct Expr::Node {
  enum class Kind { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Exp, Log, Sqrt, Sin, Cos };

  Kind kind;
  double value = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;
using Kind = Node::Kind;

struct FunctionName {
  std::string_view name;
  Kind kind;
};

constexpr std::array<FunctionName, 5> kFunctions{{
    {"exp", Kind::Exp},
    {"log", Kind::Log},
    {"sqrt", Kind::Sqrt},
    {"sin", Kind::Sin},
    {"cos", Kind::Cos},
}};

std::optional<Kind> function_kind(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return f.kind;
  }
  return std::nullopt;
}

std::string_view function_name(Kind kind) {
  for (const auto& f : kFunctions) {
    if (f.kind == kind) return f.name;
  }
  return "?";
}

NodePtr make_leaf(Kind kind, double value = 0.0) {
  return std::make_shared<const Node>(Node{kind, value, nullptr, nullptr});
}

NodePtr make_node(Kind kind, NodePtr lhs, NodePtr rhs = nullptr) {
  return std::make_shared<const Node>(Node{kind, 0.0, std::move(lhs), std::move(rhs)});
}

class Parser {
 public:
  Parser(std::string_view src, std::string_view variable) : src_(src), var_(variable) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    NodePtr e = expr();
    skip_ws();
    if (pos_ < src_.size()) {
      throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) {
        throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      }
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Kind::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make_node(Kind::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Kind::Mul, lhs, factor());
      } else if (accept('/')) {
        lhs = make_node(Kind::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr factor() {
    if (accept('-')) return make_node(Kind::Negate, factor());
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make_node(Kind::Pow, base, factor());
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed exponent", start);
    }
    double value = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (res.ec != std::errc() || !std::isfinite(value)) {
      throw ParseError("number out of range", start);
    }
    return make_leaf(Kind::Number, value);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == var_) return make_leaf(Kind::Variable);
    const auto fn = function_kind(name);
    if (!fn) throw ParseError("unknown identifier '" + std::string(name) + "'", start);

    skip_ws();
    if (pos_ >= src_.size() || src_[pos_] != '(') {
      throw ParseError("function '" + std::string(name) + "' takes exactly one argument", start);
    }
    ++pos_;
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == ')') {
      throw ParseError("function '" + std::string(name) + "' takes exactly one argument", start);
    }
    NodePtr arg = expr();
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == ',') {
      throw ParseError("function '" + std::string(name) + "' takes exactly one argument", start);
    }
    expect(')');
    return make_node(*fn, arg);
  }

  std::string_view src_;
  std::string_view var_;
  std::size_t pos_ = 0;
};

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void print_node(const Node& n, const std::string& var, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print_node(*n.lhs, var, out);
    out += op;
    print_node(*n.rhs, var, out);
    out += ')';
  };
  switch (n.kind) {
    case Kind::Number:
      if (std::signbit(n.value)) {
        out += "(-" + format_number(-n.value) + ")";
      } else {
        out += format_number(n.value);
      }
      break;
    case Kind::Variable:
      out += var;
      break;
    case Kind::Negate:
      out += "(-";
      print_node(*n.lhs, var, out);
      out += ')';
      break;
    case Kind::Add: binary(" + "); break;
    case Kind::Sub: binary(" - "); break;
    case Kind::Mul: binary(" * "); break;
    case Kind::Div: binary(" / "); break;
    case Kind::Pow: binary("^"); break;
    default:
      out += function_name(n.kind);
      out += '(';
      print_node(*n.lhs, var, out);
      out += ')';
      break;
  }
}

std::string node_text(const Node& n, const std::string& var) {
  std::string s;
  print_node(n, var, s);
  return s;
}

double eval_node(const Node& n, double x, const std::string& var) {
  auto fail = [&](const char* what) -> double { throw DomainError(what, node_text(n, var)); };
  double r = 0.0;
  switch (n.kind) {
    case Kind::Number: return n.value;
    case Kind::Variable: return x;
    case Kind::Negate: return -eval_node(*n.lhs, x, var);
    case Kind::Add: r = eval_node(*n.lhs, x, var) + eval_node(*n.rhs, x, var); break;
    case Kind::Sub: r = eval_node(*n.lhs, x, var) - eval_node(*n.rhs, x, var); break;
    case Kind::Mul: r = eval_node(*n.lhs, x, var) * eval_node(*n.rhs, x, var); break;
    case Kind::Div: {
      const double den = eval_node(*n.rhs, x, var);
      if (den == 0.0) return fail("division by zero");
      r = eval_node(*n.lhs, x, var) / den;
      break;
    }
    case Kind::Pow: {
      const double base = eval_node(*n.lhs, x, var);
      const double ex = eval_node(*n.rhs, x, var);
      if (base < 0.0 && ex != std::trunc(ex)) return fail("non-integer power of a negative number");
      if (base == 0.0 && ex < 0.0) return fail("division by zero");
      r = std::pow(base, ex);
      break;
    }
    case Kind::Exp: r = std::exp(eval_node(*n.lhs, x, var)); break;
    case Kind::Log: {
      const double a = eval_node(*n.lhs, x, var);
      if (!(a > 0.0)) return fail("logarithm of a non-positive number");
      r = std::log(a);
      break;
    }
    case Kind::Sqrt: {
      const double a = eval_node(*n.lhs, x, var);
      if (a < 0.0) return fail("square root of a negative number");
      r = std::sqrt(a);
      break;
    }
    case Kind::Sin: r = std::sin(eval_node(*n.lhs, x, var)); break;
    case Kind::Cos: r = std::cos(eval_node(*n.lhs, x, var)); break;
  }
  if (!std::isfinite(r)) return fail("non-finite result");
  return r;
}

bool references_variable(const Node& n) {
  if (n.kind == Kind::Variable) return true;
  return (n.lhs && references_variable(*n.lhs)) || (n.rhs && references_variable(*n.rhs));
}

}  // namespace

Expr Expr::parse(std::string_view src, std::string_view variable) {
  if (variable.empty() || function_kind(variable)) {
    throw ParseError("invalid variable name '" + std::string(variable) + "'", 0);
  }
  Parser p(src, variable);
  return Expr(p.parse(), std::string(src), std::string(variable));
}

Expr Expr::constant(double value, std::string_view variable) {
  auto leaf = make_leaf(Kind::Number, value);
  std::string text = node_text(*leaf, std::string(variable));
  return Expr(std::move(leaf), std::move(text), std::string(variable));
}

double Expr::eval(double x) const {
  if (!std::isfinite(x)) throw DomainError("non-finite argument", variable_);
  return eval_node(*root_, x, variable_);
}

std::string Expr::print() const { return node_text(*root_, variable_); }

bool Expr::is_constant() const { return !references_variable(*root_); }

}  // namespace akm
