#pragma once

#include <optional>
#include <string>

#include "warpfield/extended_symbol.hpp"
#include "warpfield/symbol.hpp"

namespace warpfield {

// Smooth compactly supported radial cutoff χ(εθ, εξ) with χ(0,0) = 1.
struct CutoffSpec {
  double radius = 1.0;  // support radius of χ in the packed (θ, ξ) norm
  int profile = 0;      // 0: mollifier exp(1 - 1/(1-t²)); 1: its square (flatter shoulder)
  VecD eps_schedule;    // empty → geometric, 0.5·2^{-i/2}, 8 terms
  int richardson_depth = -1;  // -1: full Neville table over the schedule

  double chi(double norm_scaled) const;  // value at ‖(εθ, εξ)‖ = norm_scaled
  VecD schedule() const;
};

struct OscQuadratureSpec {
  double tol = 3e-8;                  // per-ε refinement target (absolute)
  int gauss_order = 8;
  double points_per_wavelength = 4.0; // panel width = this / local frequency
  double extra_frequency = 0.0;       // known oscillation of the symbol itself
  double min_box = 2.0;               // decay probing never shrinks a box below this
  double max_box = 80.0;
  int max_refinements = 3;
  double node_budget = 6e7;           // per-ε tensor-node ceiling

  double delta = 0.5;        // regularized: ball radius
  double bulk_radius = 12.0; // regularized: bulk truncation R
  int boundary_nodes = 64;   // regularized: circle nodes on ∂B(δ)
  bool check_r_doubling = false;  // re-evaluate the bulk at 2R and compare
  // extra angular modes per unit radius on bulk circles; resolves amplitudes
  // concentrated near the axes, whose angular bandwidth grows linearly with r
  double angular_sideband = 6.0;
};

struct OscResult {
  Complex value{0.0};
  double error_estimate = 0.0;
  std::string method;
  std::vector<Complex> partials;  // per-ε values (cutoff) or per-term contributions (regularized)
  VecD eps_used;
  bool converged = true;
  std::string note;
};

// smallest nonnegative integer h with m - h(ρ+1) < -2k, i.e. strictly above (ρ+1)⁻¹(m+2k)
int required_iterations(double m, double rho, int k);

// 𝕀_η(s) = (2π)^{-k} lim_{ε↘0} ∫ e^{-iη(θ,ξ)} χ(εθ,εξ) s(θ,ξ) d(θ,ξ)
// by tensor quadrature resolved against the oscillation scale plus Richardson
// extrapolation on the ε-schedule (in ε²; χ is radial, hence even in ε).
OscResult eval_cutoff(const Symbol& s, const BilinearForm& eta, const CutoffSpec& cutoff = {},
                      const OscQuadratureSpec& quad = {});

// Ball/boundary/bulk split of 𝕀_η(s): on B(δ)^c the phase satisfies
// e^{-iη} = M e^{-iη} with M = iΞ·grad, Ξ = (Aξ, Aᵀθ)/φ, φ = ‖Aξ‖² + ‖Aᵀθ‖²,
// and repeated integration by parts trades oscillation for decay through the
// adjoint M*g = Ξ·grad g + div(Ξ) g:
//   𝕀 = (2π)^{-k} [ ∫_{B(δ)} e^{-iη} s
//                   + Σ_{j<h} i(-i)^j ∮_{∂B(δ)} e^{-iη} (M*)^j s · (Ξ·ν) dσ
//                   + (-i)^h ∫_{B(δ)^c} e^{-iη} (M*)^h s ],   ν = -x/‖x‖.
struct RegularizedDecomposition {
  int k = 1;
  double delta = 0.5;
  int h = 0;
  double bulk_decay_order = 0.0;  // m - h(ρ+1)
  BilinearForm eta;
  Symbol symbol;

  // closed forms for diagnostics and invariance tests (packed (θ, ξ) variables)
  expr::ExprPtr phi;
  std::vector<expr::ExprPtr> xi;  // the 2k components of Ξ
  expr::ExprPtr div_xi;

  std::function<Complex(const VecD&)> ball_integrand;  // e^{-iη} s
  std::vector<std::function<Complex(const VecD&)>> boundary_integrands;  // e^{-iη}(M*)^j s (Ξ·ν)
  std::function<Complex(const VecD&)> bulk_integrand;  // (M*)^h s, phase excluded
  // (M*)^{h+1} s, used by the tail estimator: one further integration by parts
  // over {|x| > R} bounds the truncated bulk by the exterior boundary term plus
  // the absolute integral of this. Null when a callable symbol caps out at h.
  std::function<Complex(const VecD&)> tail_integrand;
};

RegularizedDecomposition build_regularization(const Symbol& s, const BilinearForm& eta,
                                              double delta, int h);

// evaluates the decomposition; k = 1 only (k = 2 routes through pair factorization
// in eval_oscint; a genuine 4-dimensional bulk quadrature is out of numerical reach)
OscResult eval_regularized(const RegularizedDecomposition& decomp,
                           const OscQuadratureSpec& quad = {});

// method dispatch: "cutoff" | "regularized"; for k ≥ 2 both methods factor
// separable symbols over diagonal η into per-pair k=1 integrals
OscResult eval_oscint(const Symbol& s, const BilinearForm& eta, const std::string& method,
                      const CutoffSpec& cutoff = {}, const OscQuadratureSpec& quad = {});

// 𝕀_η(pair_symbolic_distribution(u, f))
Complex oscillate_distribution(const ExtendedSymbol& u, const TestFunction& f,
                               const BilinearForm& eta, const std::string& method,
                               const XQuadratureSpec& xq = {}, const CutoffSpec& cutoff = {},
                               const OscQuadratureSpec& quad = {});

// 𝕀_η(e^{i(u·θ + v·ξ)}) = e^{i (A⁻¹u)·v} by Fourier inversion
Complex oscint_pure_phase(const BilinearForm& eta, const VecD& u, const VecD& v);

// ∫_{B(R)} (1+‖x‖)^m dx over ℝ^{2k} for each truncation radius: the monotone
// sequences behind the m < -2k absolute-convergence threshold
VecD radial_power_truncations(double m, int k, const VecD& radii);

}  // namespace warpfield
