#pragma once

#include <memory>
#include <optional>

#include <json.hpp>

#include "warpfield/util.hpp"

namespace warpfield::expr {

// Immutable expression DAG over real variables x[0..n) with complex constants.
// Every node kind carries analytic derivative rules, so symbols built from
// expressions have exact derivatives of every order.
struct Node;
using ExprPtr = std::shared_ptr<const Node>;

enum class Kind { Const, Var, Add, Mul, Neg, Pow, RPow, Exp, Sin, Cos, Div, Bump };

struct Node {
  Kind kind;
  Complex value{};            // Const
  int var = -1;               // Var
  long ipow = 0;              // Pow (integer exponent >= 0)
  double rpow = 0;            // RPow (real exponent, base must stay positive)
  std::vector<ExprPtr> args;  // children

  // Bump: radial mollifier over the listed variables,
  //   u = Σ ((x[v] - center)/radius)²,  value = exp(1 - 1/(1-u)) for u < 1, else 0.
  // Normalized to 1 at the center.
  std::vector<int> bump_vars;
  VecD bump_center;
  double bump_radius = 1.0;
};

// constructors (apply light normalization: constant folding, 0/1 elimination)
ExprPtr constant(Complex c);
ExprPtr constant(double c);
ExprPtr var(int index);
ExprPtr add(std::vector<ExprPtr> terms);
ExprPtr mul(std::vector<ExprPtr> factors);
ExprPtr neg(ExprPtr a);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr pow(ExprPtr base, long n);
ExprPtr rpow(ExprPtr base, double p);
ExprPtr exp(ExprPtr a);
ExprPtr sin(ExprPtr a);
ExprPtr cos(ExprPtr a);
ExprPtr div(ExprPtr num, ExprPtr den);
ExprPtr bump(std::vector<int> vars, VecD center, double radius);

Complex eval(const ExprPtr& e, const double* x, int n);
inline Complex eval(const ExprPtr& e, const VecD& x) { return eval(e, x.data(), int(x.size())); }

// plain partial derivative ∂/∂x[var]
ExprPtr derivative(const ExprPtr& e, int var);

// structural checks
bool is_zero(const ExprPtr& e);
bool is_constant(const ExprPtr& e);
int max_var_index(const ExprPtr& e);
void collect_vars(const ExprPtr& e, std::vector<bool>& used);

// remap variable indices: x[i] -> x[map[i]] (map entry -1 = variable must not occur)
ExprPtr remap_vars(const ExprPtr& e, const std::vector<int>& map);

// substitute x[i] -> x[i] - offsets[i] (evaluating the result at x reads the
// original at x - a); bump centers shift instead of growing sub-trees
ExprPtr shift(const ExprPtr& e, const VecD& offsets);

// structural complex conjugate: conjugates constants, recurses through every
// op (all of them commute with conjugation on their real-analytic domains)
ExprPtr conjugate(const ExprPtr& e);

// JSON expression grammar (see docs/expressions.md): ops add/mul/neg/pow/rpow/exp/
// sin/cos/div/const/var/bump, with "args"/"index"/"re","im"/"exp" fields.
ExprPtr from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExprPtr& e);

// If e factors (after flattening products) into per-pair factors for pairs
// (x[p], x[k+p]), p = 0..k-1, return the factors (entry p depends only on pair p,
// already remapped to 2 variables {0,1}); constants are folded into pair 0.
// Top-level sums are NOT handled here (callers split sums termwise first).
std::optional<std::vector<ExprPtr>> pair_factorize(const ExprPtr& e, int k);

// Top-level sum terms (a non-Add expression is its own single term).
std::vector<ExprPtr> sum_terms(const ExprPtr& e);

}  // namespace warpfield::expr
