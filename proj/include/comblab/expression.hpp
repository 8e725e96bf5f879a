#pragma once

// Small arithmetic expression language for boundary data in scenario files.
//   variables: x y r (= |(x,y)|) s (sheet sign: +1 upper, -1 lower, 0 else)
//   constants: pi
//   operators: + - * / ^ (right associative), unary minus, parentheses
//   functions: sin cos tan exp log sqrt abs floor atan2 min max pow

#include <memory>
#include <stdexcept>
#include <string>

namespace comblab {

class ExpressionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ExpressionVars {
  double x = 0.0;
  double y = 0.0;
  double s = 0.0;
};

class Expression {
public:
  /// Parses `source`; throws ExpressionError with the column on failure.
  explicit Expression(std::string source);

  double operator()(const ExpressionVars& vars) const;
  const std::string& source() const { return source_; }

  struct Node;

private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace comblab
