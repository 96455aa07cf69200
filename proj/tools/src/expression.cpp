#include "bdex_cli/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "bdex/errors.hpp"

namespace bdex::cli {

struct Expression::Node {
  enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sqrt } kind;
  double value = 0.0;
  int var = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using Ptr = std::shared_ptr<const Node>;

Ptr make(Node::Kind k, Ptr a = nullptr, Ptr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  Ptr parse() {
    Ptr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + s_ + "': " + what + " at column " + std::to_string(pos_ + 1));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Ptr expr() {
    Ptr left = term();
    while (true) {
      if (eat('+')) left = make(Node::Kind::Add, left, term());
      else if (eat('-')) left = make(Node::Kind::Sub, left, term());
      else return left;
    }
  }

  Ptr term() {
    Ptr left = unary();
    while (true) {
      if (eat('*')) left = make(Node::Kind::Mul, left, unary());
      else if (eat('/')) left = make(Node::Kind::Div, left, unary());
      else return left;
    }
  }

  Ptr unary() {
    if (eat('-')) return make(Node::Kind::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }

  Ptr power() {
    Ptr base = primary();
    if (eat('^')) return make(Node::Kind::Pow, base, unary());
    return base;
  }

  Ptr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Ptr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Number;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (id == "pi") {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Number;
        n->value = std::numbers::pi;
        return n;
      }
      if (id == "u1" || id == "u2" || id == "u3") {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Variable;
        n->var = id[1] - '1';
        return n;
      }
      Node::Kind k;
      if (id == "sin") k = Node::Kind::Sin;
      else if (id == "cos") k = Node::Kind::Cos;
      else if (id == "exp") k = Node::Kind::Exp;
      else if (id == "sqrt") k = Node::Kind::Sqrt;
      else {
        pos_ = start;
        fail("unknown identifier '" + id + "'");
      }
      if (!eat('(')) fail("expected '(' after " + id);
      Ptr arg = expr();
      if (!eat(')')) fail("expected ')'");
      return make(k, arg);
    }
    fail("unexpected character");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, const std::array<double, 3>& u) {
  switch (n.kind) {
    case Node::Kind::Number: return n.value;
    case Node::Kind::Variable: return u[static_cast<std::size_t>(n.var)];
    case Node::Kind::Neg: return -eval(*n.a, u);
    case Node::Kind::Add: return eval(*n.a, u) + eval(*n.b, u);
    case Node::Kind::Sub: return eval(*n.a, u) - eval(*n.b, u);
    case Node::Kind::Mul: return eval(*n.a, u) * eval(*n.b, u);
    case Node::Kind::Div: return eval(*n.a, u) / eval(*n.b, u);
    case Node::Kind::Pow: return std::pow(eval(*n.a, u), eval(*n.b, u));
    case Node::Kind::Sin: return std::sin(eval(*n.a, u));
    case Node::Kind::Cos: return std::cos(eval(*n.a, u));
    case Node::Kind::Exp: return std::exp(eval(*n.a, u));
    case Node::Kind::Sqrt: return std::sqrt(eval(*n.a, u));
  }
  return 0.0;
}

bool reads(const Node& n, int var) {
  if (n.kind == Node::Kind::Variable) return n.var == var;
  return (n.a && reads(*n.a, var)) || (n.b && reads(*n.b, var));
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).parse();
  e.text_ = text;
  return e;
}

Expression Expression::constant(double value) {
  Expression e;
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Number;
  n->value = value;
  e.root_ = n;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  e.text_ = buf;
  return e;
}

double Expression::operator()(const std::array<double, 3>& u) const {
  return root_ ? eval(*root_, u) : 0.0;
}

bool Expression::uses(int index) const { return root_ && reads(*root_, index); }

}  // namespace bdex::cli
