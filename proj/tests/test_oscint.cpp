#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "warpfield/oscint.hpp"
#include "warpfield/quadrature.hpp"

using namespace warpfield;

namespace {

// I(e^{-θ²-ξ²}) with η(θ,ξ) = θξ: completing the square in the Gaussian pair
// integral gives (2π)^{-1} · 2π/√(4+1)... = 5^{-1/2}
const double GAUSS_ORACLE = 1.0 / std::sqrt(5.0);

Symbol gauss_k1(double m = -3.0, double rho = 0.0) {
  using namespace expr;
  auto e = exp(neg(add({pow(var(0), 2), pow(var(1), 2)})));
  return Symbol::from_expression(e, 1, m, rho);
}

CutoffSpec short_schedule() {
  CutoffSpec c;
  c.eps_schedule = VecD{0.5, 0.35355339059327373, 0.25, 0.17677669529663687, 0.125,
                        0.08838834764831843};
  return c;
}

}  // namespace

TEST_CASE("required iteration counts across orders, types and dimensions") {
  struct Row {
    double m, rho;
    int k, expect;
  };
  // frozen by hand from h > (ρ+1)^{-1}(m+2k), smallest nonnegative integer
  const Row table[] = {
      {0.0, 0.0, 1, 3},  {0.0, 1.0, 1, 2},   {0.0, 1.0, 2, 3},    {0.0, 0.0, 2, 5},
      {1.0, 1.0, 1, 2},  {2.0, 1.0, 1, 3},   {-3.0, 1.0, 1, 0},   {-5.0, 1.0, 1, 0},
      {0.0, 0.5, 1, 2},  {1.0, -0.5, 1, 7},  {0.5, 0.25, 2, 4},   {-1.0, 0.0, 1, 2},
  };
  for (const auto& row : table)
    CHECK(required_iterations(row.m, row.rho, row.k) == row.expect);
  CHECK_THROWS_AS(required_iterations(0.0, -1.0, 1), InvalidArgumentError);
  CHECK_THROWS_AS(required_iterations(0.0, 0.0, 0), InvalidArgumentError);
}

TEST_CASE("cutoff profiles are admissible bumps") {
  CutoffSpec c;
  CHECK(c.chi(0.0) == doctest::Approx(1.0));
  CHECK(c.chi(1.0) == 0.0);
  CHECK(c.chi(0.5) > 0.0);
  CHECK(c.chi(0.5) < 1.0);
  c.profile = 1;
  CHECK(c.chi(0.0) == doctest::Approx(1.0));
  CHECK(c.chi(0.5) == doctest::Approx(std::pow(CutoffSpec{}.chi(0.5), 2)));
  c.profile = 7;
  CHECK_THROWS_AS(c.chi(0.3), InvalidArgumentError);
  CHECK(CutoffSpec{}.schedule().size() == 8);
}

TEST_CASE("regularization geometry: div Xi and the phase invariance identity") {
  Symbol s = gauss_k1();
  BilinearForm eta = BilinearForm::standard(1);
  RegularizedDecomposition d = build_regularization(s, eta, 0.5, 1);

  // div Ξ = -4θξ/(θ²+ξ²)² for η(θ,ξ) = θξ
  for (VecD x : {VecD{1.0, 0.5}, VecD{-0.7, 1.3}, VecD{2.0, -0.25}}) {
    double phi = x[0] * x[0] + x[1] * x[1];
    double expect = -4.0 * x[0] * x[1] / (phi * phi);
    Complex got = expr::eval(d.div_xi, x.data(), 2);
    CHECK(got.real() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(got.imag() == doctest::Approx(0.0));
    // Ξ = (ξ, θ)/(θ² + ξ²)
    CHECK(expr::eval(d.xi[0], x.data(), 2).real() == doctest::Approx(x[1] / phi));
    CHECK(expr::eval(d.xi[1], x.data(), 2).real() == doctest::Approx(x[0] / phi));
  }

  // M e^{-iη} = e^{-iη} with M = iΞ·grad, checked through the expression forms
  using namespace expr;
  auto phase = exp(mul({constant(Complex(0.0, -1.0)), var(0), var(1)}));
  auto mg = mul({constant(Complex(0.0, 1.0)),
                 add({mul({d.xi[0], derivative(phase, 0)}), mul({d.xi[1], derivative(phase, 1)})})});
  for (VecD x : {VecD{0.8, 0.6}, VecD{-1.2, 0.9}, VecD{3.0, -2.0}}) {
    Complex lhs = expr::eval(mg, x.data(), 2);
    Complex rhs = expr::eval(phase, x.data(), 2);
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("div Xi closes the divergence theorem on annuli") {
  // flux of Ξ through circles minus the area integral of div Ξ, for a non-unit form
  MatD a(1, 1);
  a(0, 0) = 2.0;
  BilinearForm eta = BilinearForm::from_matrix(a);
  RegularizedDecomposition d = build_regularization(gauss_k1(), eta, 0.5, 1);
  auto flux = [&](double r) {
    auto circle = quad::circle_rule(r, 512);
    double acc = 0.0;
    for (double ang : circle.angles) {
      VecD x = {r * std::cos(ang), r * std::sin(ang)};
      Complex xi0 = expr::eval(d.xi[0], x.data(), 2);
      Complex xi1 = expr::eval(d.xi[1], x.data(), 2);
      acc += (xi0.real() * x[0] + xi1.real() * x[1]) / r * circle.weight;
    }
    return acc;
  };
  double r0 = 0.8, r1 = 2.3;
  auto radial = quad::panel_grid(r0, r1, 0.05, 12);
  double area = 0.0;
  for (size_t i = 0; i < radial.size(); ++i) {
    double r = radial.nodes[i];
    auto circle = quad::circle_rule(r, 512);
    double ring = 0.0;
    for (double ang : circle.angles) {
      VecD x = {r * std::cos(ang), r * std::sin(ang)};
      ring += expr::eval(d.div_xi, x.data(), 2).real() * circle.weight;
    }
    area += radial.weights[i] * ring;
  }
  CHECK(area == doctest::Approx(flux(r1) - flux(r0)).epsilon(1e-9));
}

TEST_CASE("first adjoint application matches the hand formula") {
  // for η = θξ and s = e^{-θ²-ξ²}: M*s = -4θξ(φ+1)/φ² · s with φ = θ²+ξ²
  Symbol s = gauss_k1();
  RegularizedDecomposition d = build_regularization(s, BilinearForm::standard(1), 0.5, 1);
  for (VecD x : {VecD{1.0, 0.7}, VecD{-0.9, 1.8}, VecD{2.2, -0.4}}) {
    double phi = x[0] * x[0] + x[1] * x[1];
    double g = std::exp(-phi);
    double expect = -4.0 * x[0] * x[1] * (phi + 1.0) / (phi * phi) * g;
    Complex got = d.bulk_integrand(x);
    CHECK(got.real() == doctest::Approx(expect).epsilon(1e-11));
    CHECK(std::abs(got.imag()) < 1e-13);
  }
}

TEST_CASE("iterated adjoint agrees with symbolic differentiation") {
  // build (M*)² s once through the coefficient tables and once through raw
  // expression calculus: M*g = Ξ·grad g + div(Ξ) g
  Symbol s = gauss_k1();
  RegularizedDecomposition d = build_regularization(s, BilinearForm::standard(1), 0.5, 2);
  using namespace expr;
  auto mstar = [&](ExprPtr g) {
    return add({mul({d.xi[0], derivative(g, 0)}), mul({d.xi[1], derivative(g, 1)}),
                mul({d.div_xi, g})});
  };
  auto twice = mstar(mstar(s.expression()));
  for (VecD x : {VecD{0.9, 0.8}, VecD{-1.4, 0.6}, VecD{1.1, 2.3}}) {
    Complex expect = expr::eval(twice, x.data(), 2);
    Complex got = d.bulk_integrand(x);
    CHECK(std::abs(got - expect) < 1e-10 * (1.0 + std::abs(expect)));
  }
}

TEST_CASE("boundary integrand carries the inward flux factor") {
  Symbol s = gauss_k1();
  double delta = 0.5;
  RegularizedDecomposition d = build_regularization(s, BilinearForm::standard(1), delta, 1);
  REQUIRE(d.boundary_integrands.size() == 1);
  VecD x = {delta * std::cos(0.7), delta * std::sin(0.7)};
  double phi = x[0] * x[0] + x[1] * x[1];
  Complex expect = std::exp(Complex(0.0, -x[0] * x[1])) * std::exp(-phi) *
                   (-2.0 * x[0] * x[1] / (phi * delta));
  CHECK(std::abs(d.boundary_integrands[0](x) - expect) < 1e-12);
}

TEST_CASE("h = 0 decomposition is the bare split") {
  Symbol s = gauss_k1();
  RegularizedDecomposition d = build_regularization(s, BilinearForm::standard(1), 0.5, 0);
  CHECK(d.boundary_integrands.empty());
  CHECK(d.bulk_decay_order == doctest::Approx(-3.0));
  VecD x = {1.3, -0.4};
  CHECK(std::abs(d.bulk_integrand(x) - s.eval(x)) < 1e-14);
  Complex expect = std::exp(Complex(0.0, -x[0] * x[1])) * s.eval(x);
  CHECK(std::abs(d.ball_integrand(x) - expect) < 1e-14);
}

TEST_CASE("decomposition preconditions") {
  Symbol s = gauss_k1(0.0, 0.0);  // declared order 0 needs three iterations
  BilinearForm eta = BilinearForm::standard(1);
  CHECK_THROWS_AS(build_regularization(s, eta, 0.5, 2), InsufficientRegularizationError);
  CHECK_NOTHROW(build_regularization(s, eta, 0.5, 3));
  CHECK_THROWS_AS(build_regularization(s, eta, 0.0, 3), InvalidArgumentError);

  Symbol shallow = Symbol::from_callable(
      [](const VecD&, const MultiIndex&, const MultiIndex&) { return Complex(0.0); }, 1, 0.0,
      0.0, 2);
  CHECK_THROWS_AS(build_regularization(shallow, eta, 0.5, 3), UnsupportedOrderError);

  using namespace expr;
  auto g4 = exp(neg(add({pow(var(0), 2), pow(var(1), 2), pow(var(2), 2), pow(var(3), 2)})));
  RegularizedDecomposition d2 = build_regularization(
      Symbol::from_expression(g4, 2, -5.0, 0.0), BilinearForm::standard(2), 0.5, 0);
  CHECK_THROWS_AS(eval_regularized(d2), UnsupportedOrderError);
}

TEST_CASE("Gaussian oracle through the cutoff method") {
  OscResult r = eval_cutoff(gauss_k1(), BilinearForm::standard(1));
  CHECK(r.method == "cutoff");
  CHECK(r.eps_used.size() == 8);
  CHECK(std::abs(r.value - GAUSS_ORACLE) < 1e-6 * GAUSS_ORACLE);
  CHECK(std::abs(r.value.imag()) < 1e-8);
  CHECK(r.converged);
  CHECK(std::abs(r.value - GAUSS_ORACLE) < 10.0 * r.error_estimate + 1e-9);
}

TEST_CASE("Gaussian oracle through the regularized method at h = 0 and h = 3") {
  BilinearForm eta = BilinearForm::standard(1);
  OscResult r0 = eval_regularized(build_regularization(gauss_k1(), eta, 0.5, 0));
  CHECK(std::abs(r0.value - GAUSS_ORACLE) < 1e-6 * GAUSS_ORACLE);
  OscResult r3 = eval_regularized(build_regularization(gauss_k1(), eta, 0.5, 3));
  CHECK(std::abs(r3.value - GAUSS_ORACLE) < 1e-6 * GAUSS_ORACLE);
  CHECK(r3.partials.size() == size_t(1 + 3 + 1));
  // the ball/boundary/bulk split reassembles the same number
  Complex sum{0.0};
  for (Complex p : r3.partials) sum += p;
  CHECK(std::abs(sum - r3.value) < 1e-12);
}

TEST_CASE("regularized value is independent of the ball radius") {
  BilinearForm eta = BilinearForm::standard(1);
  OscResult a = eval_regularized(build_regularization(gauss_k1(), eta, 0.5, 2));
  OscResult b = eval_regularized(build_regularization(gauss_k1(), eta, 1.0, 2));
  CHECK(std::abs(a.value - b.value) < 1e-8);
}

TEST_CASE("cutoff value is independent of the cutoff profile") {
  CutoffSpec c1 = short_schedule();
  CutoffSpec c2 = short_schedule();
  c2.profile = 1;
  c2.radius = 1.6;
  OscResult r1 = eval_cutoff(gauss_k1(), BilinearForm::standard(1), c1);
  OscResult r2 = eval_cutoff(gauss_k1(), BilinearForm::standard(1), c2);
  CHECK(std::abs(r1.value - r2.value) <= r1.error_estimate + r2.error_estimate + 1e-9);
  CHECK(std::abs(r1.value - GAUSS_ORACLE) < 1e-5);
  CHECK(std::abs(r2.value - GAUSS_ORACLE) < 1e-5);
}

TEST_CASE("the oscillatory pairing of theta xi is -i") {
  using namespace expr;
  Symbol s = Symbol::from_expression(mul({var(0), var(1)}), 1, 2.0, 1.0);
  // no decay in any direction: the ε-series needs a longer schedule, and the
  // boxes grow as 1/ε, so the node ceiling must come up with them
  CutoffSpec c;
  c.eps_schedule.clear();
  for (int i = 0; i < 10; ++i) c.eps_schedule.push_back(0.5 * std::pow(2.0, -0.5 * i));
  OscQuadratureSpec q;
  q.node_budget = 1e8;
  OscResult r = eval_cutoff(s, BilinearForm::standard(1), c, q);
  CHECK(std::abs(r.value - Complex(0.0, -1.0)) < 1e-4);
}

TEST_CASE("theta- or xi-independent symbols evaluate at the origin") {
  using namespace expr;
  BilinearForm eta = BilinearForm::standard(1);
  // s(ξ) = e^{-ξ²}(1+ξ²)^{-1}: value 1 at the origin
  auto sxi = mul({exp(neg(pow(var(1), 2))), rpow(add({constant(1.0), pow(var(1), 2)}), -1.0)});
  Symbol s1 = Symbol::from_expression(sxi, 1, 0.0, 0.0);
  OscResult c1 = eval_cutoff(s1, eta);
  CHECK(std::abs(c1.value - 1.0) < 1e-4);
  OscResult g1 = eval_oscint(s1, eta, "regularized");
  CHECK(std::abs(g1.value - 1.0) < 1e-3);

  // s(θ) = cos(θ) e^{-θ²}: value 1 at the origin
  auto sth = mul({cos(var(0)), exp(neg(pow(var(0), 2)))});
  Symbol s2 = Symbol::from_expression(sth, 1, 0.0, 0.0);
  OscResult c2 = eval_cutoff(s2, eta);
  CHECK(std::abs(c2.value - 1.0) < 1e-4);

  // a bare polynomial has no decay anywhere: the ε-series converges, but slowly
  // enough that the default schedule must flag its own extrapolation residual
  Symbol s3 = Symbol::from_expression(pow(var(0), 2), 1, 2.0, 1.0);
  OscResult c3 = eval_cutoff(s3, eta);
  CHECK(std::abs(c3.value) < 2e-2);
  CHECK(std::abs(c3.value) <= c3.error_estimate);
  CHECK_FALSE(c3.converged);
}

TEST_CASE("pure phases recover the Fourier inversion value") {
  using namespace expr;
  // s = e^{i(2θ - ξ)} pairs to e^{i·2·(-1)} = e^{-2i}
  auto e = exp(mul({constant(Complex(0.0, 1.0)),
                    add({mul({constant(2.0), var(0)}), neg(var(1))})}));
  Symbol s = Symbol::from_expression(e, 1, 0.0, 0.0);
  OscQuadratureSpec q;
  q.extra_frequency = 2.0;
  OscResult r = eval_cutoff(s, BilinearForm::standard(1), CutoffSpec{}, q);
  Complex oracle = oscint_pure_phase(BilinearForm::standard(1), {2.0}, {-1.0});
  CHECK(std::abs(oracle - std::exp(Complex(0.0, -2.0))) < 1e-15);
  CHECK(std::abs(r.value - oracle) < 1e-3);
}

TEST_CASE("separable k = 2 symbols factor into pair integrals") {
  using namespace expr;
  auto e = exp(neg(add({pow(var(0), 2), pow(var(2), 2), pow(var(1), 2), pow(var(3), 2)})));
  Symbol s = Symbol::from_expression(e, 2, -3.0, 0.0);
  double oracle = GAUSS_ORACLE * GAUSS_ORACLE;

  OscResult rc = eval_oscint(s, BilinearForm::standard(2), "cutoff", short_schedule());
  CHECK(rc.note.find("pair-factorized") != std::string::npos);
  CHECK(std::abs(rc.value - oracle) < 1e-5);

  OscResult rr = eval_oscint(s, BilinearForm::standard(2), "regularized");
  CHECK(std::abs(rr.value - oracle) < 1e-4);

  // the Minkowski pairing flips one phase sign; the Gaussian value is real, so unchanged
  OscResult rm = eval_oscint(s, BilinearForm::minkowski2(), "regularized");
  CHECK(std::abs(rm.value - oracle) < 1e-4);
}

TEST_CASE("non-separable regularized evaluation is rejected with guidance") {
  using namespace expr;
  auto coupled = exp(neg(add({pow(var(0), 2), pow(var(1), 2), pow(var(2), 2), pow(var(3), 2),
                              mul({constant(0.5), var(0), var(3)})})));
  Symbol s = Symbol::from_expression(coupled, 2, -3.0, 0.0);
  CHECK_THROWS_AS(eval_oscint(s, BilinearForm::standard(2), "regularized"),
                  UnsupportedOrderError);
  CHECK_THROWS_AS(eval_oscint(s, BilinearForm::standard(2), "lebesgue"), InvalidArgumentError);
}

TEST_CASE("zero symbols short-circuit") {
  Symbol z = Symbol::zero(1);
  OscResult r = eval_oscint(z, BilinearForm::standard(1), "cutoff");
  CHECK(std::abs(r.value) == 0.0);
  CHECK(r.note == "zero symbol");
}

TEST_CASE("radial power symbol matches its expression form") {
  using namespace expr;
  double m = -1.3;
  Symbol fast = radial_power_symbol(1, m);
  auto e = rpow(add({constant(1.0), pow(var(0), 2), pow(var(1), 2)}), m / 2.0);
  Symbol slow = Symbol::from_expression(e, 1, m, 1.0);
  for (VecD x : {VecD{0.0, 0.0}, VecD{1.2, -0.7}, VecD{-2.5, 3.1}}) {
    for (auto [a, b] : {std::pair<MultiIndex, MultiIndex>{{0}, {0}},
                        {{1}, {0}},
                        {{0}, {2}},
                        {{2}, {1}},
                        {{1}, {3}}}) {
      Complex lhs = fast.eval(x, a, b);
      Complex rhs = slow.eval(x, a, b);
      CHECK(std::abs(lhs - rhs) < 1e-10 * (1.0 + std::abs(rhs)));
    }
  }
  CHECK(fast.max_derivative_order() == 64);
}

TEST_CASE("radial truncation sequences split at the integrability threshold") {
  VecD radii = {5.0, 10.0, 20.0, 40.0};
  // m = -3 < -2k: saturating; exact value 2π[(1-(1+R)^{-1}) - (1-(1+R)^{-2})/2]
  VecD conv = radial_power_truncations(-3.0, 1, radii);
  double exact10 = 2.0 * PI * ((1.0 - 1.0 / 11.0) - 0.5 * (1.0 - 1.0 / 121.0));
  double exact40 = 2.0 * PI * ((1.0 - 1.0 / 41.0) - 0.5 * (1.0 - 1.0 / 1681.0));
  CHECK(conv[1] == doctest::Approx(exact10).epsilon(1e-9));
  CHECK(conv[3] == doctest::Approx(exact40).epsilon(1e-9));
  // saturates toward π from below with shrinking increments
  CHECK(conv[3] < PI);
  CHECK(conv[2] - conv[1] < conv[1] - conv[0]);
  CHECK(conv[3] - conv[2] < conv[2] - conv[1]);
  // m = -2 = -2k: logarithmic growth, increments do not die out
  VecD log_growth = radial_power_truncations(-2.0, 1, radii);
  CHECK(log_growth[3] - log_growth[2] > 0.5 * (log_growth[2] - log_growth[1]));
  // m = 0: volume growth
  VecD vol = radial_power_truncations(0.0, 1, radii);
  CHECK(vol[3] > 3.0 * vol[2]);
  // k = 2 surface factor: ∫_{B_R} 1 dx = π²R⁴/2 in ℝ⁴
  VecD four = radial_power_truncations(0.0, 2, {2.0});
  CHECK(four[0] == doctest::Approx(PI * PI * 8.0).epsilon(1e-9));
}

TEST_CASE("regularized evaluation holds up under R-doubling") {
  OscQuadratureSpec q;
  q.bulk_radius = 10.0;
  q.check_r_doubling = true;
  Symbol s = radial_power_symbol(1, 0.0).with_class(0.0, 0.0);
  int h = required_iterations(0.0, 0.0, 1);
  OscResult r = eval_regularized(build_regularization(s, BilinearForm::standard(1), 0.5, h), q);
  CHECK(r.converged);
  CHECK(std::isfinite(r.value.real()));
  CHECK(r.note.find("R-doubling") != std::string::npos);
}
