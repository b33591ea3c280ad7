#pragma once

#include <functional>
#include <map>
#include <memory>

#include "warpfield/expressions.hpp"
#include "warpfield/util.hpp"

namespace warpfield {

// Non-degenerate bilinear form η(θ, ξ) = θᵀ A ξ on ℝ^k × ℝ^k.
struct BilinearForm {
  int k = 1;
  MatD A;  // k×k, |det A| must stay above the degeneracy floor

  static BilinearForm standard(int k);                  // A = identity
  static BilinearForm from_matrix(const MatD& A);       // validates
  static BilinearForm minkowski2();                     // diag(1, -1), k = 2

  double operator()(const VecD& theta, const VecD& xi) const;
  bool is_diagonal(double tol = 0.0) const;
  double diag(int i) const { return A(i, i); }
};

// A symbol s(θ, ξ) of declared order m and type ρ ∈ (-1, 1]:
//   |D_θ^β D_ξ^α s| ≤ C_{αβ} (1 + ‖(θ,ξ)‖)^{m - ρ(|α|+|β|)},  D^α = (-i)^{|α|} ∂^α.
// Expression-backed symbols differentiate analytically to any order; callable-backed
// symbols provide derivatives up to max_derivative_order and finite differences beyond.
class Symbol {
 public:
  // callable signature: (point θξ of length 2k, α over ξ, β over θ) -> D_θ^β D_ξ^α s
  using EvalFn = std::function<Complex(const VecD&, const MultiIndex&, const MultiIndex&)>;

  Symbol() = default;

  static Symbol from_expression(expr::ExprPtr e, int k, double m, double rho);
  static Symbol from_callable(EvalFn f, int k, double m, double rho, int max_derivative_order);
  static Symbol zero(int k);

  int k() const { return k_; }
  double order() const { return m_; }
  double type() const { return rho_; }
  int max_derivative_order() const { return max_order_; }
  bool has_expression() const { return expr_ != nullptr; }
  const expr::ExprPtr& expression() const { return expr_; }
  bool is_zero_symbol() const { return expr_ && expr::is_zero(expr_); }

  // D_θ^β D_ξ^α s at the point (θ, ξ) packed as one vector of length 2k.
  // θ components come first; α indexes ξ derivatives, β indexes θ derivatives.
  Complex eval(const VecD& theta_xi, const MultiIndex& alpha, const MultiIndex& beta) const;
  Complex eval(const VecD& theta_xi) const;

  // the plain-∂ derivative expression ∂_θ^β ∂_ξ^α s (expression-backed only), cached
  expr::ExprPtr derivative_expr(const MultiIndex& alpha, const MultiIndex& beta) const;

  Symbol with_class(double m, double rho) const;  // re-declare (m, ρ)

 private:
  int k_ = 1;
  double m_ = 0.0, rho_ = 1.0;
  int max_order_ = 0;
  expr::ExprPtr expr_;
  EvalFn fn_;
  // cache of differentiated expressions keyed by (α|β) flattened
  mutable std::shared_ptr<std::map<std::vector<int>, expr::ExprPtr>> deriv_cache_;

  Complex eval_fd(const VecD& pt, MultiIndex alpha, MultiIndex beta) const;
};

void validate_type(double rho);  // ρ ∈ (-1, 1]

// Sampling layout for semi-norm suprema: log-spaced radii × directions built from
// product sphere grids.
struct SamplingSpec {
  double r_max = 1e3;
  int n_radii = 64;       // log-spaced, plus the origin
  int n_angles = 32;      // per circle factor (k = 1); reduced per factor for k ≥ 2
  double r_min = 1e-2;
};

struct SeminormEstimate {
  double value = 0.0;       // sup over samples of |D^β D^α s| (1+r)^{-m+ρ(|α|+|β|)}
  VecD argmax;              // sample point attaining the sup
  MultiIndex alpha, beta;
  double m, rho;
};

// sampled semi-norm p_{αβ}(s) for the declared (or overridden) class
SeminormEstimate estimate_seminorm(const Symbol& s, const MultiIndex& alpha,
                                   const MultiIndex& beta, const SamplingSpec& spec = {});
SeminormEstimate estimate_seminorm(const Symbol& s, const MultiIndex& alpha,
                                   const MultiIndex& beta, double m, double rho,
                                   const SamplingSpec& spec);

struct MembershipFit {
  MultiIndex alpha, beta;
  double exponent = 0.0;    // fitted growth of the normalized ratio vs (1+r); ≤ tol passes
  double constant = 0.0;    // sup of the ratio over all samples
  bool pass = false;
  bool all_below_floor = false;  // ratio vanishes to numerical zero at large radii
};

struct MembershipReport {
  bool pass = false;
  double m, rho;
  int up_to_order;
  std::vector<MembershipFit> fits;
};

// Does s numerically behave like a member of S^m_ρ up to the given derivative order?
// Growth exponents are fitted on the top decade of the radial samples.
MembershipReport verify_membership(const Symbol& s, double m, double rho, int up_to_order,
                                   const SamplingSpec& spec = {}, double growth_tolerance = 0.15);

// product of symbols of matching k and type: orders add
Symbol symbol_product(const Symbol& a, const Symbol& b);

// D_θ^β D_ξ^α s as a symbol of order m - ρ(|α|+|β|)
Symbol symbol_derivative(const Symbol& s, const MultiIndex& alpha, const MultiIndex& beta);

// direction grid on the unit sphere of ℝ^{2k} (product-of-circles layout)
std::vector<VecD> direction_grid(int k, int n_angles);

// (1 + ‖(θ,ξ)‖²)^{m/2}: a type-1 symbol of order m with closed-form derivatives
// of every order, cheap enough for deeply iterated decompositions
Symbol radial_power_symbol(int k, double m);

}  // namespace warpfield
