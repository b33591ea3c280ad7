#include "warpfield/extended_symbol.hpp"

#include <algorithm>
#include <cmath>

namespace warpfield {

TestFunction TestFunction::from_expression(expr::ExprPtr e, int s, VecD support_lo,
                                           VecD support_hi) {
  require(s >= 1, "TestFunction: base dimension >= 1 required");
  require(int(support_lo.size()) == s && int(support_hi.size()) == s,
          "TestFunction: support box dimension mismatch");
  for (int i = 0; i < s; ++i)
    require(support_lo[i] < support_hi[i], "TestFunction: empty support box");
  require(expr::max_var_index(e) < s, "TestFunction: expression uses variables beyond s");
  TestFunction f;
  f.s_ = s;
  f.e_ = std::move(e);
  f.lo_ = std::move(support_lo);
  f.hi_ = std::move(support_hi);
  return f;
}

TestFunction TestFunction::bump(const VecD& center, double radius) {
  require(radius > 0, "TestFunction::bump: radius must be positive");
  int s = int(center.size());
  std::vector<int> vars(s);
  for (int i = 0; i < s; ++i) vars[i] = i;
  VecD lo(s), hi(s);
  for (int i = 0; i < s; ++i) {
    lo[i] = center[i] - radius;
    hi[i] = center[i] + radius;
  }
  return from_expression(expr::bump(vars, center, radius), s, lo, hi);
}

TestFunction TestFunction::zero(int s) {
  VecD lo(s, -1.0), hi(s, 1.0);
  return from_expression(expr::constant(0.0), s, lo, hi);
}

Complex TestFunction::eval(const VecD& x) const {
  require(int(x.size()) == s_, "TestFunction::eval: dimension mismatch");
  for (int i = 0; i < s_; ++i)
    if (x[i] < lo_[i] || x[i] > hi_[i]) return Complex(0.0);
  return expr::eval(e_, x);
}

TestFunction TestFunction::scaled(Complex c) const {
  TestFunction f = *this;
  f.e_ = expr::mul({expr::constant(c), e_});
  return f;
}

TestFunction TestFunction::plus(const TestFunction& other) const {
  require(s_ == other.s_, "TestFunction::plus: dimension mismatch");
  TestFunction f = *this;
  f.e_ = expr::add({e_, other.e_});
  for (int i = 0; i < s_; ++i) {
    f.lo_[i] = std::min(lo_[i], other.lo_[i]);
    f.hi_[i] = std::max(hi_[i], other.hi_[i]);
  }
  return f;
}

TestFunction TestFunction::translated(const VecD& a) const {
  require(int(a.size()) == s_, "TestFunction::translated: dimension mismatch");
  TestFunction f = *this;
  f.e_ = expr::shift(e_, a);
  for (int i = 0; i < s_; ++i) {
    f.lo_[i] = lo_[i] + a[i];
    f.hi_[i] = hi_[i] + a[i];
  }
  return f;
}

TestFunction TestFunction::conjugated() const {
  TestFunction f = *this;
  f.e_ = expr::conjugate(e_);
  return f;
}

ExtendedSymbol ExtendedSymbol::from_fiber(FiberFn fiber, int s, int k, double m, double rho,
                                          double box_scale, int max_box_index) {
  require(s >= 1 && k >= 1, "ExtendedSymbol: dimensions must be positive");
  require(box_scale > 0 && max_box_index >= 1, "ExtendedSymbol: bad exhaustion parameters");
  validate_type(rho);
  ExtendedSymbol u;
  u.s_ = s;
  u.k_ = k;
  u.m_ = m;
  u.rho_ = rho;
  u.box_scale_ = box_scale;
  u.max_box_index_ = max_box_index;
  u.fiber_ = std::move(fiber);
  return u;
}

ExtendedSymbol ExtendedSymbol::separable(ProfileFn profile, Symbol base, int s,
                                         double box_scale, int max_box_index) {
  ExtendedSymbol u;
  u.s_ = s;
  u.k_ = base.k();
  u.m_ = base.order();
  u.rho_ = base.type();
  u.box_scale_ = box_scale;
  u.max_box_index_ = max_box_index;
  require(s >= 1, "ExtendedSymbol: base dimension >= 1 required");
  require(box_scale > 0 && max_box_index >= 1, "ExtendedSymbol: bad exhaustion parameters");
  u.profile_ = std::move(profile);
  u.base_ = std::make_shared<const Symbol>(std::move(base));
  return u;
}

Symbol ExtendedSymbol::fiber(const VecD& x) const {
  require(int(x.size()) == s_, "ExtendedSymbol::fiber: base point dimension mismatch");
  if (profile_) return scale_symbol(profile_(x), *base_);
  Symbol f = fiber_(x);
  require(f.k() == k_, "ExtendedSymbol: fiber k differs from the declared k");
  return f;
}

Complex ExtendedSymbol::profile(const VecD& x) const {
  require(profile_ != nullptr, "ExtendedSymbol::profile: not a separable extended symbol");
  return profile_(x);
}

const Symbol& ExtendedSymbol::base_symbol() const {
  require(base_ != nullptr, "ExtendedSymbol::base_symbol: not a separable extended symbol");
  return *base_;
}

std::pair<VecD, VecD> ExtendedSymbol::box(int j) const {
  require(j >= 1 && j <= max_box_index_, "ExtendedSymbol::box: index outside exhaustion range");
  double half = j * box_scale_;
  return {VecD(s_, -half), VecD(s_, half)};
}

Symbol scale_symbol(Complex c, const Symbol& s) {
  if (s.has_expression())
    return Symbol::from_expression(expr::mul({expr::constant(c), s.expression()}), s.k(),
                                   s.order(), s.type());
  Symbol sc = s;
  auto f = [c, sc](const VecD& pt, const MultiIndex& al, const MultiIndex& be) {
    return c * sc.eval(pt, al, be);
  };
  return Symbol::from_callable(f, s.k(), s.order(), s.type(), s.max_derivative_order());
}

XGrid box_grid(const VecD& lo, const VecD& hi, const XQuadratureSpec& spec) {
  int s = int(lo.size());
  require(int(hi.size()) == s && s >= 1, "box_grid: box dimension mismatch");
  std::vector<quad::Grid1D> axes(s);
  for (int i = 0; i < s; ++i) {
    quad::Panel1DSpec p;
    p.a = lo[i];
    p.b = hi[i];
    p.panel_width = spec.panel_width;
    p.order = spec.order;
    for (double t : spec.sqrt_singular_points) {
      if (t > lo[i] && t < hi[i]) {
        p.split_points.push_back(t);
        p.sqrt_singular_points.push_back(t);
      }
    }
    axes[i] = quad::panel_grid_singular(p);
  }
  XGrid g;
  std::vector<size_t> idx(s, 0);
  for (;;) {
    VecD x(s);
    double w = 1.0;
    for (int i = 0; i < s; ++i) {
      x[i] = axes[i].nodes[idx[i]];
      w *= axes[i].weights[idx[i]];
    }
    g.nodes.push_back(std::move(x));
    g.weights.push_back(w);
    int axis = s - 1;
    while (axis >= 0 && ++idx[axis] == axes[axis].size()) idx[axis--] = 0;
    if (axis < 0) break;
  }
  return g;
}

XGrid pairing_grid(const TestFunction& f, const XQuadratureSpec& spec) {
  return box_grid(f.support_lo(), f.support_hi(), spec);
}

double extended_seminorm(const ExtendedSymbol& u, const MultiIndex& alpha,
                         const MultiIndex& beta, int j, const XQuadratureSpec& spec) {
  auto [lo, hi] = u.box(j);
  XGrid grid = box_grid(lo, hi, spec);
  double q = 0.0;
  for (size_t i = 0; i < grid.nodes.size(); ++i) {
    double p = estimate_seminorm(u.fiber(grid.nodes[i]), alpha, beta, spec.fiber_sampling).value;
    if (!std::isfinite(p))
      throw LocalIntegrabilityError("extended_seminorm: non-finite fiber semi-norm at a node");
    q += grid.weights[i] * p;
  }
  return q;
}

Symbol pair_symbolic_distribution(const ExtendedSymbol& u, const TestFunction& f,
                                  const XQuadratureSpec& spec) {
  require(u.base_dimension() == f.base_dimension(),
          "pair_symbolic_distribution: base dimension mismatch");
  auto [lo, hi] = u.box(u.max_box_index());
  for (int i = 0; i < u.base_dimension(); ++i) {
    if (f.support_lo()[i] < lo[i] || f.support_hi()[i] > hi[i])
      throw DomainError("pair_symbolic_distribution: test function support escapes exhaustion");
  }
  XGrid grid = pairing_grid(f, spec);

  if (u.is_separable()) {
    Complex mass = 0.0;
    for (size_t i = 0; i < grid.nodes.size(); ++i)
      mass += grid.weights[i] * f.eval(grid.nodes[i]) * u.profile(grid.nodes[i]);
    return scale_symbol(mass, u.base_symbol());
  }

  auto weights = std::make_shared<std::vector<Complex>>();
  auto fibers = std::make_shared<std::vector<Symbol>>();
  int max_ord = 64;
  for (size_t i = 0; i < grid.nodes.size(); ++i) {
    Complex w = grid.weights[i] * f.eval(grid.nodes[i]);
    if (w == Complex(0.0)) continue;
    weights->push_back(w);
    fibers->push_back(u.fiber(grid.nodes[i]));
    if (!fibers->back().has_expression())
      max_ord = std::min(max_ord, fibers->back().max_derivative_order());
  }
  auto eval = [weights, fibers](const VecD& pt, const MultiIndex& al, const MultiIndex& be) {
    Complex sum = 0.0;
    for (size_t i = 0; i < fibers->size(); ++i)
      sum += (*weights)[i] * (*fibers)[i].eval(pt, al, be);
    return sum;
  };
  return Symbol::from_callable(eval, u.k(), u.order(), u.type(), max_ord);
}

}  // namespace warpfield
