#include "comblab/expression.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

namespace comblab {

struct Expression::Node {
  enum class Kind { Number, Variable, Unary, Binary, Call } kind = Kind::Number;
  double value = 0.0;
  char var = 0;
  char op = 0;
  std::string name;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

const std::map<std::string, int>& function_arity() {
  static const std::map<std::string, int> table = {
      {"sin", 1}, {"cos", 1}, {"tan", 1}, {"exp", 1}, {"log", 1}, {"sqrt", 1}, {"abs", 1},
      {"floor", 1}, {"atan2", 2}, {"min", 2}, {"max", 2}, {"pow", 2}};
  return table;
}

class Parser {
public:
  explicit Parser(const std::string& src) : src_(src) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return n;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError(what + " at column " + std::to_string(pos_ + 1) + " in '" + src_ + "'");
  }
  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) { ++pos_; return true; }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  static NodePtr binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return n;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) lhs = binary('+', lhs, term());
      else if (accept('-')) lhs = binary('-', lhs, term());
      else return lhs;
    }
  }
  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) lhs = binary('*', lhs, unary());
      else if (accept('/')) lhs = binary('/', lhs, unary());
      else return lhs;
    }
  }
  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Unary;
      n->op = '-';
      n->args = {unary()};
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    auto base = primary();
    if (accept('^')) return binary('^', base, unary());
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    if (accept('(')) {
      auto n = expr();
      expect(')');
      return n;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(src_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      pos_ += used;
      auto n = std::make_shared<Node>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      const std::string name = src_.substr(start, pos_ - start);
      auto n = std::make_shared<Node>();
      if (name == "pi") {
        n->value = std::numbers::pi;
        return n;
      }
      if (name == "x" || name == "y" || name == "r" || name == "s") {
        n->kind = Node::Kind::Variable;
        n->var = name[0];
        return n;
      }
      const auto it = function_arity().find(name);
      if (it == function_arity().end()) {
        pos_ = start;
        fail("unknown identifier '" + name + "'");
      }
      n->kind = Node::Kind::Call;
      n->name = name;
      expect('(');
      n->args.push_back(expr());
      for (int k = 1; k < it->second; ++k) {
        expect(',');
        n->args.push_back(expr());
      }
      expect(')');
      return n;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& src_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, const ExpressionVars& v) {
  switch (n.kind) {
    case Node::Kind::Number: return n.value;
    case Node::Kind::Variable:
      switch (n.var) {
        case 'x': return v.x;
        case 'y': return v.y;
        case 'r': return std::hypot(v.x, v.y);
        default: return v.s;
      }
    case Node::Kind::Unary: return -eval(*n.args[0], v);
    case Node::Kind::Binary: {
      const double a = eval(*n.args[0], v), b = eval(*n.args[1], v);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        default: return std::pow(a, b);
      }
    }
    case Node::Kind::Call: {
      const double a = eval(*n.args[0], v);
      const double b = n.args.size() > 1 ? eval(*n.args[1], v) : 0.0;
      if (n.name == "sin") return std::sin(a);
      if (n.name == "cos") return std::cos(a);
      if (n.name == "tan") return std::tan(a);
      if (n.name == "exp") return std::exp(a);
      if (n.name == "log") return std::log(a);
      if (n.name == "sqrt") return std::sqrt(a);
      if (n.name == "abs") return std::abs(a);
      if (n.name == "floor") return std::floor(a);
      if (n.name == "atan2") return std::atan2(a, b);
      if (n.name == "min") return std::min(a, b);
      if (n.name == "max") return std::max(a, b);
      return std::pow(a, b);
    }
  }
  return 0.0;
}

}  // namespace

Expression::Expression(std::string source) : source_(std::move(source)) {
  root_ = Parser(source_).parse();
}

double Expression::operator()(const ExpressionVars& vars) const { return eval(*root_, vars); }

}  // namespace comblab
