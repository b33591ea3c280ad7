#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "warpfield/extended_symbol.hpp"
#include "warpfield/quadrature.hpp"

using namespace warpfield;

namespace {

Symbol gauss_symbol_k1() {
  using namespace expr;
  auto e = exp(neg(add({pow(var(0), 2), pow(var(1), 2)})));
  return Symbol::from_expression(e, 1, -3.0, 0.0);
}

}  // namespace

TEST_CASE("bump test function: center value, support box, outside zero") {
  TestFunction f = TestFunction::bump({0.5}, 0.25);
  CHECK(f.eval({0.5}).real() == doctest::Approx(1.0));
  CHECK(std::abs(f.eval({0.5 + 0.25})) == 0.0);
  CHECK(std::abs(f.eval({2.0})) == 0.0);
  CHECK(f.support_lo()[0] == doctest::Approx(0.25));
  CHECK(f.support_hi()[0] == doctest::Approx(0.75));
  CHECK(std::abs(f.eval({0.6})) > 0.0);

  TestFunction g = TestFunction::bump({0.0, 1.0}, 0.5);
  CHECK(g.base_dimension() == 2);
  CHECK(g.eval({0.0, 1.0}).real() == doctest::Approx(1.0));
  CHECK(std::abs(g.eval({0.0, 1.6})) == 0.0);
}

TEST_CASE("test function algebra: scaling and sums widen the support hull") {
  TestFunction a = TestFunction::bump({-0.5}, 0.2);
  TestFunction b = TestFunction::bump({0.7}, 0.2);
  TestFunction c = a.scaled(Complex(0.0, 2.0)).plus(b);
  CHECK(c.eval({-0.5}) == Complex(0.0, 2.0));
  CHECK(c.eval({0.7}).real() == doctest::Approx(1.0));
  CHECK(c.support_lo()[0] == doctest::Approx(-0.7));
  CHECK(c.support_hi()[0] == doctest::Approx(0.9));

  TestFunction z = TestFunction::zero(1);
  CHECK(std::abs(z.eval({0.0})) == 0.0);
}

TEST_CASE("box grid integrates smooth and sqrt-singular profiles") {
  XQuadratureSpec spec;
  XGrid g = box_grid({-1.0}, {1.0}, spec);
  double total = 0.0;
  for (size_t i = 0; i < g.nodes.size(); ++i) total += g.weights[i] * std::cos(g.nodes[i][0]);
  CHECK(total == doctest::Approx(2.0 * std::sin(1.0)).epsilon(1e-12));

  // ∫_{-1}^{1} |x|^{-1/2} dx = 4 needs the substitution panels
  spec.sqrt_singular_points = {0.0};
  g = box_grid({-1.0}, {1.0}, spec);
  total = 0.0;
  for (size_t i = 0; i < g.nodes.size(); ++i)
    total += g.weights[i] / std::sqrt(std::abs(g.nodes[i][0]));
  CHECK(total == doctest::Approx(4.0).epsilon(1e-10));

  // 2-d tensor volume
  XQuadratureSpec plain;
  XGrid g2 = box_grid({-1.0, 0.0}, {1.0, 3.0}, plain);
  double vol = 0.0;
  for (double w : g2.weights) vol += w;
  CHECK(vol == doctest::Approx(6.0).epsilon(1e-13));
}

TEST_CASE("extended semi-norm of a constant-fiber family is the box volume") {
  using namespace expr;
  // declared at order 0, the unit-height Gaussian has p_{0,0} = sup e^{-r²} = 1
  auto g = exp(neg(add({pow(var(0), 2), pow(var(1), 2)})));
  Symbol base = Symbol::from_expression(g, 1, 0.0, 0.0);
  ExtendedSymbol u = ExtendedSymbol::separable([](const VecD&) { return Complex(1.0); }, base, 1);
  // q_{0,0,K_j} = vol(K_j) · p_{0,0} = 2j
  double q1 = extended_seminorm(u, {0}, {0}, 1);
  double q2 = extended_seminorm(u, {0}, {0}, 2);
  CHECK(q1 == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(q2 == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("extended semi-norm integrates an |x|^{-1/2} profile exactly") {
  using namespace expr;
  // |x|^{-1/2} = (x²)^{-1/4}
  auto prof = rpow(pow(var(0), 2), -0.25);
  // declare the Gaussian fiber at order 0 so its p_{0,0} semi-norm is exactly 1
  auto g = exp(neg(add({pow(var(0), 2), pow(var(1), 2)})));
  Symbol base = Symbol::from_expression(g, 1, 0.0, 0.0);
  ExtendedSymbol u = ExtendedSymbol::separable(
      [prof](const VecD& x) { return expr::eval(prof, x.data(), 1); }, base, 1);
  XQuadratureSpec spec;
  spec.sqrt_singular_points = {0.0};
  // ∫_{-1}^{1} |x|^{-1/2} dx · p_{0,0}(base) = 4
  double q = extended_seminorm(u, {0}, {0}, 1, spec);
  CHECK(q == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("extended semi-norm rejects non-integrable fibers") {
  Symbol bad = Symbol::from_callable(
      [](const VecD&, const MultiIndex&, const MultiIndex&) {
        return Complex(std::numeric_limits<double>::infinity());
      },
      1, 0.0, 0.0, 2);
  ExtendedSymbol u = ExtendedSymbol::from_fiber([bad](const VecD&) { return bad; }, 1, 1, 0.0, 0.0);
  CHECK_THROWS_AS(extended_seminorm(u, {0}, {0}, 1), LocalIntegrabilityError);
}

TEST_CASE("pairing a separable family is mass times the base symbol") {
  Symbol base = gauss_symbol_k1();
  ExtendedSymbol u = ExtendedSymbol::separable([](const VecD&) { return Complex(1.0); }, base, 1);
  TestFunction f = TestFunction::bump({0.0}, 0.5);
  XQuadratureSpec spec;
  Symbol paired = pair_symbolic_distribution(u, f, spec);
  CHECK(paired.has_expression());
  CHECK(paired.order() == doctest::Approx(base.order()));
  CHECK(paired.type() == doctest::Approx(base.type()));

  XGrid g = pairing_grid(f, spec);
  Complex mass{0.0};
  for (size_t i = 0; i < g.nodes.size(); ++i) mass += g.weights[i] * f.eval(g.nodes[i]);
  for (VecD pt : {VecD{0.0, 0.0}, VecD{0.7, -0.3}, VecD{1.5, 2.0}}) {
    Complex expect = mass * base.eval(pt);
    CHECK(std::abs(paired.eval(pt) - expect) < 1e-12 * (1.0 + std::abs(expect)));
  }
  // derivative bookkeeping survives the scaling
  Complex d = paired.eval({0.5, 0.25}, {1}, {0});
  Complex expect = mass * base.eval({0.5, 0.25}, {1}, {0});
  CHECK(std::abs(d - expect) < 1e-12 * (1.0 + std::abs(expect)));
}

TEST_CASE("pairing against the zero test function collapses the family") {
  Symbol base = gauss_symbol_k1();
  ExtendedSymbol u = ExtendedSymbol::separable([](const VecD&) { return Complex(1.0); }, base, 1);
  Symbol paired = pair_symbolic_distribution(u, TestFunction::zero(1));
  CHECK(std::abs(paired.eval({0.3, 0.4})) == 0.0);
}

TEST_CASE("pairing a genuine fiber family matches direct x-quadrature") {
  // u(x; θ, ξ) = e^{ixθ} e^{-θ² - ξ²}: fibers built per base point
  auto fiber = [](const VecD& x) {
    using namespace expr;
    auto e = mul({exp(mul({constant(Complex(0.0, 1.0)), constant(x[0]), var(0)})),
                  exp(neg(add({pow(var(0), 2), pow(var(1), 2)})))});
    return Symbol::from_expression(e, 1, -3.0, 0.0);
  };
  ExtendedSymbol u = ExtendedSymbol::from_fiber(fiber, 1, 1, -3.0, 0.0);
  CHECK_FALSE(u.is_separable());
  TestFunction f = TestFunction::bump({0.2}, 0.4);
  // mollifier bumps have large interior derivatives; refine the x-panels so the
  // pairing quadrature itself drops below the comparison tolerance
  XQuadratureSpec spec;
  spec.panel_width = 0.04;
  spec.order = 16;
  Symbol paired = pair_symbolic_distribution(u, f, spec);

  for (VecD pt : {VecD{0.0, 0.0}, VecD{1.2, -0.5}}) {
    Complex direct = quad::integrate_adaptive(
        [&](double x) {
          return f.eval({x}) * std::exp(Complex(0.0, x * pt[0])) *
                 std::exp(-pt[0] * pt[0] - pt[1] * pt[1]);
        },
        f.support_lo()[0], f.support_hi()[0], 1e-12);
    CHECK(std::abs(paired.eval(pt) - direct) < 1e-8 * (1.0 + std::abs(direct)));
  }

  // D_θ acts fiberwise: D_θ u = (-i)(ix - 2θ) u
  VecD pt = {0.4, 0.1};
  Complex direct = quad::integrate_adaptive(
      [&](double x) {
        Complex val = f.eval({x}) * std::exp(Complex(0.0, x * pt[0])) *
                      std::exp(-pt[0] * pt[0] - pt[1] * pt[1]);
        return Complex(0.0, -1.0) * (Complex(0.0, x) - 2.0 * pt[0]) * val;
      },
      f.support_lo()[0], f.support_hi()[0], 1e-12);
  CHECK(std::abs(paired.eval(pt, {0}, {1}) - direct) < 1e-8 * (1.0 + std::abs(direct)));
}

TEST_CASE("pairing is linear in the test function") {
  auto fiber = [](const VecD& x) {
    using namespace expr;
    auto e = mul({constant(Complex(1.0 + x[0] * x[0])),
                  exp(neg(add({pow(var(0), 2), pow(var(1), 2)})))});
    return Symbol::from_expression(e, 1, -3.0, 0.0);
  };
  ExtendedSymbol u = ExtendedSymbol::from_fiber(fiber, 1, 1, -3.0, 0.0);
  // two distinct profiles over a common support, so all three pairings share one
  // x-grid and linearity holds to rounding rather than to quadrature error
  using namespace expr;
  TestFunction f1 = TestFunction::bump({0.0}, 0.6);
  TestFunction f2 =
      TestFunction::from_expression(cos(mul({constant(3.0), var(0)})), 1, {-0.6}, {0.6})
          .scaled(Complex(0.0, 1.5));
  Symbol p1 = pair_symbolic_distribution(u, f1);
  Symbol p2 = pair_symbolic_distribution(u, f2);
  Symbol p12 = pair_symbolic_distribution(u, f1.plus(f2));
  for (VecD pt : {VecD{0.0, 0.0}, VecD{0.9, 0.4}}) {
    Complex lhs = p12.eval(pt);
    Complex rhs = p1.eval(pt) + p2.eval(pt);
    CHECK(std::abs(lhs - rhs) < 1e-11 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("pairing bound: |paired(0,0)| is controlled by the semi-norm times sup|f|") {
  Symbol base = gauss_symbol_k1();
  ExtendedSymbol u = ExtendedSymbol::separable(
      [](const VecD& x) { return Complex(std::cos(x[0])); }, base, 1);
  TestFunction f = TestFunction::bump({0.0}, 0.8);
  Symbol paired = pair_symbolic_distribution(u, f);
  double q = extended_seminorm(u, {0}, {0}, 1);
  CHECK(std::abs(paired.eval({0.0, 0.0})) <= q * 1.0 + 1e-9);
}

TEST_CASE("support escaping the exhaustion raises a domain error") {
  Symbol base = gauss_symbol_k1();
  ExtendedSymbol u =
      ExtendedSymbol::separable([](const VecD&) { return Complex(1.0); }, base, 1, 1.0, 3);
  TestFunction far = TestFunction::bump({5.0}, 0.5);
  CHECK_THROWS_AS(pair_symbolic_distribution(u, far), DomainError);
  CHECK_THROWS_AS(u.box(4), InvalidArgumentError);
  auto [lo, hi] = u.box(3);
  CHECK(lo[0] == doctest::Approx(-3.0));
  CHECK(hi[0] == doctest::Approx(3.0));
}
