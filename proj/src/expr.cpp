#include "metamat/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>
#include <system_error>
#include <vector>

#include "metamat/error.hpp"

namespace metamat {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& found)
    : Error("syntax error at offset " + std::to_string(offset) + ": expected one of {" + join(expected) +
            "}, found " + found),
      offset_(offset),
      expected_(std::move(expected)) {}

UnknownIdentifier::UnknownIdentifier(std::size_t offset, std::string name)
    : Error("unknown identifier '" + name + "' at offset " + std::to_string(offset)),
      offset_(offset),
      name_(std::move(name)) {}

std::string Smoothness::describe() const {
  switch (kind) {
    case Kind::TwiceDifferentiable:
      return "twice-differentiable";
    case Kind::Lipschitz: {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, lipschitz_constant);
      return "lipschitz:" + std::string(buf, res.ptr);
    }
    case Kind::Modulus:
      return "modulus:" + modulus;
  }
  return {};
}

Smoothness parse_smoothness(std::string_view text) {
  if (text == "twice-differentiable" || text == "c2") return Smoothness::twice_differentiable();
  if (text.starts_with("lipschitz")) {
    if (text == "lipschitz") return Smoothness::lipschitz(0.0);
    if (text.size() > 10 && text[9] == ':') {
      double L = 0.0;
      auto body = text.substr(10);
      auto res = std::from_chars(body.data(), body.data() + body.size(), L);
      if (res.ec == std::errc() && res.ptr == body.data() + body.size() && L >= 0.0) {
        return Smoothness::lipschitz(L);
      }
    }
  }
  if (text.starts_with("modulus:")) return Smoothness::modulus_of_continuity(std::string(text.substr(8)));
  throw InvalidParameter("unknown smoothness descriptor '" + std::string(text) + "'");
}

namespace detail {

enum class Func { Sin, Cos, Exp, Sqrt, Abs };

struct Node {
  enum class Kind { Number, Pi, Var, Neg, Add, Sub, Mul, Div, Pow, Call };

  Kind kind;
  double value = 0.0;
  int var = 0;
  Func func = Func::Sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

}  // namespace detail

namespace {

using detail::Func;
using detail::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_leaf(Node::Kind kind, double value = 0.0, int var = 0) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->value = value;
  n->var = var;
  return n;
}

NodePtr make_unary(Node::Kind kind, NodePtr arg, Func func = Func::Sin) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->func = func;
  n->lhs = std::move(arg);
  return n;
}

NodePtr make_binary(Node::Kind kind, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

struct Token {
  enum class Kind { Number, Ident, Op, LParen, RParen, End };

  Kind kind;
  std::size_t offset;
  std::string_view text;
  double number = 0.0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) { advance(); }

  NodePtr parse() {
    NodePtr root = sum();
    if (tok_.kind != Token::Kind::End) {
      fail({"+", "-", "*", "/", "^", "end of input"});
    }
    return root;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const std::string found = tok_.kind == Token::Kind::End ? "end of input" : "'" + std::string(tok_.text) + "'";
    throw ParseError(tok_.offset, std::move(expected), found);
  }

  bool is_op(char c) const { return tok_.kind == Token::Kind::Op && tok_.text[0] == c; }

  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) {
      tok_ = {Token::Kind::End, start, {}};
      return;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number(start);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      tok_ = {Token::Kind::Ident, start, src_.substr(start, pos_ - start)};
      return;
    }
    ++pos_;
    switch (c) {
      case '+':
      case '-':
      case '*':
      case '/':
      case '^':
        tok_ = {Token::Kind::Op, start, src_.substr(start, 1)};
        return;
      case '(':
        tok_ = {Token::Kind::LParen, start, src_.substr(start, 1)};
        return;
      case ')':
        tok_ = {Token::Kind::RParen, start, src_.substr(start, 1)};
        return;
      default:
        tok_ = {Token::Kind::Op, start, src_.substr(start, 1)};
        fail({"number", "identifier", "operator", "(", ")"});
    }
  }

  void lex_number(std::size_t start) {
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
    if (mantissa == 0) {
      tok_ = {Token::Kind::Number, start, src_.substr(start, pos_ - start)};
      fail({"digit"});
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;  // "2e" is the number 2 followed by identifier e
    }
    const std::string_view text = src_.substr(start, pos_ - start);
    double value = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || !std::isfinite(value)) {
      tok_ = {Token::Kind::Number, start, text};
      fail({"finite number"});
    }
    tok_ = {Token::Kind::Number, start, text, value};
  }

  NodePtr sum() {
    NodePtr lhs = product();
    while (is_op('+') || is_op('-')) {
      const auto kind = is_op('+') ? Node::Kind::Add : Node::Kind::Sub;
      advance();
      lhs = make_binary(kind, lhs, product());
    }
    return lhs;
  }

  NodePtr product() {
    NodePtr lhs = unary();
    while (is_op('*') || is_op('/')) {
      const auto kind = is_op('*') ? Node::Kind::Mul : Node::Kind::Div;
      advance();
      lhs = make_binary(kind, lhs, unary());
    }
    return lhs;
  }

  NodePtr unary() {
    if (is_op('-')) {
      advance();
      return make_unary(Node::Kind::Neg, unary());
    }
    if (is_op('+')) {
      advance();
      return unary();
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (is_op('^')) {
      advance();
      return make_binary(Node::Kind::Pow, base, unary());
    }
    return base;
  }

  NodePtr primary() {
    switch (tok_.kind) {
      case Token::Kind::Number: {
        auto n = make_leaf(Node::Kind::Number, tok_.number);
        advance();
        return n;
      }
      case Token::Kind::LParen: {
        advance();
        NodePtr inner = sum();
        if (tok_.kind != Token::Kind::RParen) fail({")", "+", "-", "*", "/", "^"});
        advance();
        return inner;
      }
      case Token::Kind::Ident:
        return identifier();
      default:
        fail({"number", "identifier", "(", "-", "+"});
    }
  }

  NodePtr identifier() {
    const std::string_view name = tok_.text;
    const std::size_t offset = tok_.offset;
    if (name == "x1" || name == "x2" || name == "x3") {
      advance();
      return make_leaf(Node::Kind::Var, 0.0, name[1] - '1');
    }
    if (name == "pi") {
      advance();
      return make_leaf(Node::Kind::Pi);
    }
    Func func;
    if (name == "sin") {
      func = Func::Sin;
    } else if (name == "cos") {
      func = Func::Cos;
    } else if (name == "exp") {
      func = Func::Exp;
    } else if (name == "sqrt") {
      func = Func::Sqrt;
    } else if (name == "abs") {
      func = Func::Abs;
    } else {
      throw UnknownIdentifier(offset, std::string(name));
    }
    advance();
    if (tok_.kind != Token::Kind::LParen) fail({"("});
    advance();
    NodePtr arg = sum();
    if (tok_.kind != Token::Kind::RParen) fail({")", "+", "-", "*", "/", "^"});
    advance();
    return make_unary(Node::Kind::Call, arg, func);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_{Token::Kind::End, 0, {}};
};

double eval_node(const Node& n, const Point& x) {
  switch (n.kind) {
    case Node::Kind::Number:
      return n.value;
    case Node::Kind::Pi:
      return std::numbers::pi;
    case Node::Kind::Var:
      return x[static_cast<std::size_t>(n.var)];
    case Node::Kind::Neg:
      return -eval_node(*n.lhs, x);
    case Node::Kind::Add:
      return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
    case Node::Kind::Sub:
      return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
    case Node::Kind::Mul:
      return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
    case Node::Kind::Div:
      return eval_node(*n.lhs, x) / eval_node(*n.rhs, x);
    case Node::Kind::Pow:
      return std::pow(eval_node(*n.lhs, x), eval_node(*n.rhs, x));
    case Node::Kind::Call: {
      const double v = eval_node(*n.lhs, x);
      switch (n.func) {
        case Func::Sin:
          return std::sin(v);
        case Func::Cos:
          return std::cos(v);
        case Func::Exp:
          return std::exp(v);
        case Func::Sqrt:
          return std::sqrt(v);
        case Func::Abs:
          return std::abs(v);
      }
    }
  }
  return 0.0;
}

void print_node(const Node& n, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print_node(*n.lhs, out);
    out += op;
    print_node(*n.rhs, out);
    out += ')';
  };
  switch (n.kind) {
    case Node::Kind::Number: {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, n.value);
      out.append(buf, res.ptr);
      return;
    }
    case Node::Kind::Pi:
      out += "pi";
      return;
    case Node::Kind::Var:
      out += 'x';
      out += static_cast<char>('1' + n.var);
      return;
    case Node::Kind::Neg:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    case Node::Kind::Add:
      return binary(" + ");
    case Node::Kind::Sub:
      return binary(" - ");
    case Node::Kind::Mul:
      return binary(" * ");
    case Node::Kind::Div:
      return binary(" / ");
    case Node::Kind::Pow:
      return binary("^");
    case Node::Kind::Call: {
      static constexpr const char* names[] = {"sin", "cos", "exp", "sqrt", "abs"};
      out += names[static_cast<int>(n.func)];
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
    }
  }
}

}  // namespace

double Expression::evaluate(const Point& x) const { return eval_node(*root_, x); }

std::string Expression::to_string() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

Expression parse_expression(std::string_view source) { return Expression(Parser(source).parse()); }

CoefficientField parse(std::string_view source, Smoothness smoothness) {
  Expression expr = parse_expression(source);
  return {std::string(source), [expr](const Point& x) { return expr.evaluate(x); }, std::move(smoothness)};
}

CoefficientField constant_field(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return {std::string(buf, res.ptr), [value](const Point&) { return value; }, {}};
}

CoefficientField preset(std::string_view name, int b, int P) {
  if (name == "ex1") {
    return {"ex1", [](const Point&) { return 5.0; }, {}};
  }
  if (name == "ex2") {
    if (b < 1 || P < 1) throw InvalidParameter("ex2 needs b >= 1 and P >= 1");
    const double sigma = std::sqrt(3.0) / (2.0 * b * P);
    const double peak = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
    const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
    return {"ex2", [peak, inv_two_var](const Point& x) {
              const double d1 = x[0] - 0.5;
              const double d2 = x[1] - 0.5;
              const double d3 = x[2] - 0.5;
              return 5.0 + peak * std::exp(-(d1 * d1 + d2 * d2 + d3 * d3) * inv_two_var);
            },
            {}};
  }
  if (name == "ex3") {
    return {"ex3", [](const Point& x) { return 1.0 + 0.5 * std::sin(x[0]); }, {}};
  }
  if (name == "ex4") {
    return {"ex4", [](const Point& x) { return 1.0 + 0.5 * std::sin(100.0 * x[0]); }, {}};
  }
  throw InvalidParameter("unknown preset '" + std::string(name) + "' (expected ex1, ex2, ex3 or ex4)");
}

}  // namespace metamat
