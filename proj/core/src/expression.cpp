#include "mmt/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "mmt/errors.hpp"

namespace mmt {
namespace detail {

enum class Op { Const, VarX, VarZ, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sqrt, Sin, Cos };

struct Node {
  Op op;
  double value = 0.0;  // Const
  int zindex = 0;      // VarZ, 1-based
  std::shared_ptr<const Node> a, b;
};

using P = std::shared_ptr<const Node>;

P make(Op op, P a = nullptr, P b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

P make_const(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

P make_z(int k) {
  auto n = std::make_shared<Node>();
  n->op = Op::VarZ;
  n->zindex = k;
  return n;
}

bool is_const(const P& n, double v) { return n->op == Op::Const && n->value == v; }

// constant folding keeps derivative trees small
P simp(Op op, P a, P b = nullptr) {
  switch (op) {
    case Op::Add:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value + b->value);
      break;
    case Op::Sub:
      if (is_const(b, 0.0)) return a;
      if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value - b->value);
      break;
    case Op::Mul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value * b->value);
      break;
    case Op::Div:
      if (is_const(a, 0.0)) return make_const(0.0);
      if (is_const(b, 1.0)) return a;
      break;
    case Op::Neg:
      if (a->op == Op::Const) return make_const(-a->value);
      break;
    default:
      break;
  }
  return make(op, std::move(a), std::move(b));
}

double eval(const Node* n, const ExprEnv& env) {
  switch (n->op) {
    case Op::Const: return n->value;
    case Op::VarX:
      if (!env.has_x) throw InputError("expression: variable x is not bound");
      return env.x;
    case Op::VarZ:
      if (n->zindex > env.n || env.z == nullptr)
        throw InputError("expression: variable z" + std::to_string(n->zindex) + " is not bound");
      return env.z[n->zindex - 1];
    case Op::Add: return eval(n->a.get(), env) + eval(n->b.get(), env);
    case Op::Sub: return eval(n->a.get(), env) - eval(n->b.get(), env);
    case Op::Mul: return eval(n->a.get(), env) * eval(n->b.get(), env);
    case Op::Div: return eval(n->a.get(), env) / eval(n->b.get(), env);
    case Op::Pow: return std::pow(eval(n->a.get(), env), eval(n->b.get(), env));
    case Op::Neg: return -eval(n->a.get(), env);
    case Op::Exp: return std::exp(eval(n->a.get(), env));
    case Op::Log: return std::log(eval(n->a.get(), env));
    case Op::Sqrt: return std::sqrt(eval(n->a.get(), env));
    case Op::Sin: return std::sin(eval(n->a.get(), env));
    case Op::Cos: return std::cos(eval(n->a.get(), env));
  }
  return 0.0;
}

struct Parser {
  const std::string& s;
  size_t at = 0;

  explicit Parser(const std::string& text) : s(text) {}

  void skip() {
    while (at < s.size() && std::isspace(static_cast<unsigned char>(s[at]))) ++at;
  }

  char peek() {
    skip();
    return at < s.size() ? s[at] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++at;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw InputError("expression parse error at position " + std::to_string(at) + ": " + msg);
  }

  P parse_expr() {
    P lhs = parse_term();
    for (;;) {
      if (accept('+'))
        lhs = make(Op::Add, lhs, parse_term());
      else if (accept('-'))
        lhs = make(Op::Sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  P parse_term() {
    P lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = make(Op::Mul, lhs, parse_unary());
      else if (accept('/'))
        lhs = make(Op::Div, lhs, parse_unary());
      else
        return lhs;
    }
  }

  P parse_unary() {
    if (accept('-')) return make(Op::Neg, parse_unary());
    return parse_power();
  }

  P parse_power() {
    P base = parse_atom();
    if (accept('^')) return make(Op::Pow, base, parse_unary());
    return base;
  }

  P parse_atom() {
    const char c = peek();
    if (c == '(') {
      ++at;
      P e = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail("expected number, identifier or '('");
  }

  P parse_number() {
    skip();
    size_t end = at;
    const char* begin = s.c_str() + at;
    char* out = nullptr;
    double v = std::strtod(begin, &out);
    if (out == begin) fail("malformed number");
    end = at + (out - begin);
    at = end;
    return make_const(v);
  }

  P parse_ident() {
    skip();
    size_t start = at;
    while (at < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[at])) || s[at] == '_'))
      ++at;
    const std::string name = s.substr(start, at - start);
    if (accept('(')) {
      P arg = parse_expr();
      if (!accept(')')) fail("expected ')' after function argument");
      if (name == "exp") return make(Op::Exp, arg);
      if (name == "log") return make(Op::Log, arg);
      if (name == "sqrt") return make(Op::Sqrt, arg);
      if (name == "sin") return make(Op::Sin, arg);
      if (name == "cos") return make(Op::Cos, arg);
      fail("unknown function '" + name + "'");
    }
    if (name == "x") return make(Op::VarX);
    if (name.size() >= 2 && name[0] == 'z') {
      bool digits = true;
      for (size_t i = 1; i < name.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits) {
        int k = std::atoi(name.c_str() + 1);
        if (k >= 1) return make_z(k);
      }
    }
    fail("unknown identifier '" + name + "' (use z1..zn or x)");
  }
};

P diff(const P& n, const Node& var);

P diff(const P& n, const Node& var) {
  switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::VarX: return make_const(var.op == Op::VarX ? 1.0 : 0.0);
    case Op::VarZ:
      return make_const(var.op == Op::VarZ && var.zindex == n->zindex ? 1.0 : 0.0);
    case Op::Add: return simp(Op::Add, diff(n->a, var), diff(n->b, var));
    case Op::Sub: return simp(Op::Sub, diff(n->a, var), diff(n->b, var));
    case Op::Mul:
      return simp(Op::Add, simp(Op::Mul, diff(n->a, var), n->b),
                  simp(Op::Mul, n->a, diff(n->b, var)));
    case Op::Div:
      // (a/b)' = a'/b - a b'/b^2
      return simp(Op::Sub, simp(Op::Div, diff(n->a, var), n->b),
                  simp(Op::Div, simp(Op::Mul, n->a, diff(n->b, var)),
                       simp(Op::Mul, n->b, n->b)));
    case Op::Pow: {
      if (n->b->op == Op::Const) {
        // (a^c)' = c a^(c-1) a'
        const double c = n->b->value;
        return simp(Op::Mul, make_const(c),
                    simp(Op::Mul, make(Op::Pow, n->a, make_const(c - 1.0)), diff(n->a, var)));
      }
      // a^b = exp(b log a)
      P loga = make(Op::Log, n->a);
      P inner = simp(Op::Add, simp(Op::Mul, diff(n->b, var), loga),
                     simp(Op::Div, simp(Op::Mul, n->b, diff(n->a, var)), n->a));
      return simp(Op::Mul, make(Op::Pow, n->a, n->b), inner);
    }
    case Op::Neg: return simp(Op::Neg, diff(n->a, var));
    case Op::Exp: return simp(Op::Mul, make(Op::Exp, n->a), diff(n->a, var));
    case Op::Log: return simp(Op::Div, diff(n->a, var), n->a);
    case Op::Sqrt:
      return simp(Op::Div, diff(n->a, var),
                  simp(Op::Mul, make_const(2.0), make(Op::Sqrt, n->a)));
    case Op::Sin: return simp(Op::Mul, make(Op::Cos, n->a), diff(n->a, var));
    case Op::Cos: return simp(Op::Neg, simp(Op::Mul, make(Op::Sin, n->a), diff(n->a, var)));
  }
  return make_const(0.0);
}

void print(const Node* n, std::ostream& os) {
  auto paren = [&](const P& c) {
    os << '(';
    print(c.get(), os);
    os << ')';
  };
  switch (n->op) {
    case Op::Const: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n->value;
      os << tmp.str();
      break;
    }
    case Op::VarX: os << 'x'; break;
    case Op::VarZ: os << 'z' << n->zindex; break;
    case Op::Add: paren(n->a); os << " + "; paren(n->b); break;
    case Op::Sub: paren(n->a); os << " - "; paren(n->b); break;
    case Op::Mul: paren(n->a); os << " * "; paren(n->b); break;
    case Op::Div: paren(n->a); os << " / "; paren(n->b); break;
    case Op::Pow: paren(n->a); os << " ^ "; paren(n->b); break;
    case Op::Neg: os << '-'; paren(n->a); break;
    case Op::Exp: os << "exp("; print(n->a.get(), os); os << ')'; break;
    case Op::Log: os << "log("; print(n->a.get(), os); os << ')'; break;
    case Op::Sqrt: os << "sqrt("; print(n->a.get(), os); os << ')'; break;
    case Op::Sin: os << "sin("; print(n->a.get(), os); os << ')'; break;
    case Op::Cos: os << "cos("; print(n->a.get(), os); os << ')'; break;
  }
}

bool equal(const Node* a, const Node* b) {
  if (a == b) return true;
  if (a->op != b->op) return false;
  switch (a->op) {
    case Op::Const: return a->value == b->value;
    case Op::VarX: return true;
    case Op::VarZ: return a->zindex == b->zindex;
    default:
      if (a->a && !equal(a->a.get(), b->a.get())) return false;
      if (a->b && b->b) return equal(a->b.get(), b->b.get());
      return (a->b == nullptr) == (b->b == nullptr);
  }
}

void scan(const Node* n, int& maxz, bool& usesx) {
  if (n->op == Op::VarZ) maxz = std::max(maxz, n->zindex);
  if (n->op == Op::VarX) usesx = true;
  if (n->a) scan(n->a.get(), maxz, usesx);
  if (n->b) scan(n->b.get(), maxz, usesx);
}

}  // namespace detail

Expr Expr::parse(const std::string& text) {
  detail::Parser p(text);
  detail::P root = p.parse_expr();
  p.skip();
  if (p.at != text.size()) p.fail("trailing input");
  return Expr(root);
}

Expr Expr::constant(double c) { return Expr(detail::make_const(c)); }

Expr Expr::variable(const std::string& name) { return parse(name); }

double Expr::operator()(const ExprEnv& env) const {
  if (!root_) throw InputError("expression: empty");
  return detail::eval(root_.get(), env);
}

double Expr::eval_x(double x) const {
  ExprEnv env;
  env.x = x;
  env.has_x = true;
  return (*this)(env);
}

double Expr::eval_z(const double* z, int n) const {
  ExprEnv env;
  env.z = z;
  env.n = n;
  return (*this)(env);
}

double Expr::eval_scalar(double s) const { return eval_z(&s, 1); }

Expr Expr::derivative(const std::string& var) const {
  if (!root_) throw InputError("expression: empty");
  detail::Node v;
  if (var == "x") {
    v.op = detail::Op::VarX;
  } else if (var.size() >= 2 && var[0] == 'z') {
    v.op = detail::Op::VarZ;
    v.zindex = std::atoi(var.c_str() + 1);
    if (v.zindex < 1) throw InputError("derivative: bad variable '" + var + "'");
  } else {
    throw InputError("derivative: bad variable '" + var + "'");
  }
  return Expr(detail::diff(root_, v));
}

std::string Expr::str() const {
  if (!root_) return "";
  std::ostringstream os;
  detail::print(root_.get(), os);
  return os.str();
}

bool Expr::equal_tree(const Expr& other) const {
  if (!root_ || !other.root_) return root_ == other.root_;
  return detail::equal(root_.get(), other.root_.get());
}

int Expr::max_z_index() const {
  int maxz = 0;
  bool usesx = false;
  if (root_) detail::scan(root_.get(), maxz, usesx);
  return maxz;
}

bool Expr::uses_x() const {
  int maxz = 0;
  bool usesx = false;
  if (root_) detail::scan(root_.get(), maxz, usesx);
  return usesx;
}

}  // namespace mmt
