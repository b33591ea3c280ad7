#pragma once

#include <functional>
#include <memory>

#include "warpfield/quadrature.hpp"
#include "warpfield/symbol.hpp"

namespace warpfield {

// Compactly supported test function on the base space ℝ^s.
class TestFunction {
 public:
  static TestFunction from_expression(expr::ExprPtr e, int s, VecD support_lo, VecD support_hi);
  // standard mollifier bump of the given radius, normalized to 1 at the center
  static TestFunction bump(const VecD& center, double radius);
  static TestFunction zero(int s);

  int base_dimension() const { return s_; }
  Complex eval(const VecD& x) const;
  const VecD& support_lo() const { return lo_; }
  const VecD& support_hi() const { return hi_; }
  const expr::ExprPtr& expression() const { return e_; }

  TestFunction scaled(Complex c) const;
  TestFunction plus(const TestFunction& other) const;  // support box = hull
  TestFunction translated(const VecD& a) const;        // f_(a)(x) = f(x - a)
  TestFunction conjugated() const;

 private:
  int s_ = 1;
  expr::ExprPtr e_;
  VecD lo_, hi_;
};

// Base-point-indexed family of Symbols x ↦ u(x), locally integrable in x, with a
// shared (k, m, ρ) across fibers and a compact box exhaustion K_j = [-jL, jL]^s.
class ExtendedSymbol {
 public:
  using FiberFn = std::function<Symbol(const VecD&)>;
  using ProfileFn = std::function<Complex(const VecD&)>;

  static ExtendedSymbol from_fiber(FiberFn fiber, int s, int k, double m, double rho,
                                   double box_scale = 1.0, int max_box_index = 8);
  // u(x) = g(x)·s₀: scalar profile times a fixed symbol
  static ExtendedSymbol separable(ProfileFn profile, Symbol base, int s,
                                  double box_scale = 1.0, int max_box_index = 8);

  Symbol fiber(const VecD& x) const;
  int base_dimension() const { return s_; }
  int k() const { return k_; }
  double order() const { return m_; }
  double type() const { return rho_; }
  double box_scale() const { return box_scale_; }
  int max_box_index() const { return max_box_index_; }

  bool is_separable() const { return profile_ != nullptr; }
  Complex profile(const VecD& x) const;
  const Symbol& base_symbol() const;

  // exhaustion box K_j = [-j·L, j·L]^s
  std::pair<VecD, VecD> box(int j) const;

 private:
  int s_ = 1, k_ = 1;
  double m_ = 0.0, rho_ = 0.0;
  double box_scale_ = 1.0;
  int max_box_index_ = 8;
  FiberFn fiber_;
  ProfileFn profile_;
  std::shared_ptr<const Symbol> base_;
};

// c·s as a symbol of the same class
Symbol scale_symbol(Complex c, const Symbol& s);

// Quadrature layout on the base space: per-axis composite Gauss panels with
// optional sqrt-substitution splits at integrable |x - a|^{-1/2}-type points.
struct XQuadratureSpec {
  double panel_width = 0.25;
  int order = 12;
  VecD sqrt_singular_points = {};  // per-axis split locations (applied on every axis)
  SamplingSpec fiber_sampling = {};
};

struct XGrid {
  std::vector<VecD> nodes;
  VecD weights;
};

// tensor grid over the box [lo, hi]
XGrid box_grid(const VecD& lo, const VecD& hi, const XQuadratureSpec& spec);
// grid over the support box of f (shared by pairing and the pointwise route)
XGrid pairing_grid(const TestFunction& f, const XQuadratureSpec& spec);

// q_{α,β,K_j}(u): quadrature over K_j of the sampled fiber semi-norm
double extended_seminorm(const ExtendedSymbol& u, const MultiIndex& alpha,
                         const MultiIndex& beta, int j, const XQuadratureSpec& spec = {});

// the Symbol (θ,ξ) ↦ ∫ u(x)(θ,ξ) f(x) dx, with the x-integral as a fixed
// quadrature sum; order/type inherited from u
Symbol pair_symbolic_distribution(const ExtendedSymbol& u, const TestFunction& f,
                                  const XQuadratureSpec& spec = {});

}  // namespace warpfield
