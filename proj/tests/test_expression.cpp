#include <doctest.h>

#include <cmath>

#include "mmt/errors.hpp"
#include "mmt/expression.hpp"

using namespace mmt;

TEST_CASE("evaluation with precedence and functions") {
  Expr e = Expr::parse("z1 * (1 - z1)");
  CHECK(e.eval_scalar(0.25) == doctest::Approx(0.1875));

  CHECK(Expr::parse("2 + 3 * 4").eval_x(0.0) == 14.0);
  CHECK(Expr::parse("2 ^ 3 ^ 2").eval_x(0.0) == 512.0);  // right associative
  CHECK(Expr::parse("-x^2").eval_x(3.0) == -9.0);
  CHECK(Expr::parse("exp(log(5))").eval_x(0.0) == doctest::Approx(5.0));
  const double zz[2] = {4.0, 0.0};
  CHECK(Expr::parse("sqrt(z1)+sin(z2)*cos(z2)").eval_z(zz, 2) == doctest::Approx(2.0));

  ExprEnv env;
  double z = 1.5;
  env.z = &z;
  env.n = 1;
  env.x = 2.5;
  env.has_x = true;
  CHECK(Expr::parse("  z1+ x ")(env) == doctest::Approx(4.0));
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(Expr::parse("z1 +"), InputError);
  CHECK_THROWS_AS(Expr::parse("foo(z1)"), InputError);
  CHECK_THROWS_AS(Expr::parse("y + 1"), InputError);
  CHECK_THROWS_AS(Expr::parse("(z1"), InputError);
  CHECK_THROWS_AS(Expr::parse("z1 1.5"), InputError);
}

TEST_CASE("parse -> serialize -> parse round-trips to an equal tree") {
  for (const char* text : {
           "z1 * (1 - z1)",
           "exp(-1 / (1 - x^2))",
           "sqrt(1 - z1^2) + sin(3.5 * z2) / cos(z2)",
           "-(z1 - 0.25) * -(z2 + 4) ^ 2",
       }) {
    Expr a = Expr::parse(text);
    Expr b = Expr::parse(a.str());
    CHECK(a.equal_tree(b));
    CHECK(a.str() == b.str());
  }
}

TEST_CASE("structural derivative matches finite differences") {
  const char* exprs[] = {"z1*(1-z1)", "sin(2*z1)*exp(z1)", "z1^3 - 2/z1",
                         "sqrt(z1)", "z1^z1"};
  for (const char* text : exprs) {
    Expr f = Expr::parse(text);
    Expr df = f.derivative("z1");
    for (double s : {0.3, 0.7, 1.3}) {
      const double h = 1e-6;
      const double fd = (f.eval_scalar(s + h) - f.eval_scalar(s - h)) / (2 * h);
      CHECK(df.eval_scalar(s) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("variable scan") {
  Expr e = Expr::parse("z3 + x * z1");
  CHECK(e.max_z_index() == 3);
  CHECK(e.uses_x());
  CHECK_FALSE(Expr::parse("z1").uses_x());
}

TEST_CASE("unbound variables raise input errors") {
  Expr e = Expr::parse("z2");
  double z = 1.0;
  CHECK_THROWS_AS(e.eval_z(&z, 1), InputError);
  CHECK_THROWS_AS(Expr::parse("x").eval_z(&z, 1), InputError);
}
