#pragma once

#include <memory>
#include <string>
#include <vector>

namespace mmt {

/// Evaluation environment: component values z1..zn plus the spatial
/// coordinate x. Unbound variables raise InputError at evaluation time.
struct ExprEnv {
  const double* z = nullptr;
  int n = 0;
  double x = 0.0;
  bool has_x = false;
};

namespace detail {
struct Node;
}

/// Parsed arithmetic expression over z1..zn and x with +, -, *, /, ^,
/// parentheses and the functions exp, log, sqrt, sin, cos.
///
/// grammar:
///   expr   := term { ('+'|'-') term }
///   term   := unary { ('*'|'/') unary }
///   unary  := '-' unary | power
///   power  := atom [ '^' unary ]          (right associative)
///   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
class Expr {
 public:
  Expr() = default;

  static Expr parse(const std::string& text);
  static Expr constant(double c);
  static Expr variable(const std::string& name);  // "x" or "z<k>"

  bool valid() const { return root_ != nullptr; }

  double operator()(const ExprEnv& env) const;
  double eval_x(double x) const;                       // spatial fields
  double eval_z(const double* z, int n) const;         // state fields
  double eval_scalar(double s) const;                  // z1 := s

  /// Exact derivative of the syntax tree with respect to `var`
  /// ("x" or "z<k>"); result is lightly simplified.
  Expr derivative(const std::string& var) const;

  /// Canonical serialization; parse(str()) reproduces an equal tree.
  std::string str() const;

  bool equal_tree(const Expr& other) const;

  /// Largest k such that z<k> occurs (0 if none), and whether x occurs.
  int max_z_index() const;
  bool uses_x() const;

 private:
  explicit Expr(std::shared_ptr<const detail::Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const detail::Node> root_;
};

}  // namespace mmt
