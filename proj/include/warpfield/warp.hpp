#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "warpfield/field.hpp"
#include "warpfield/fock.hpp"
#include "warpfield/oscint.hpp"
#include "warpfield/symbol.hpp"

namespace warpfield {

// Admissible deformation matrix: ηQ antisymmetric, η = diag(1,-1,...,-1).
// Equivalently Qη is an antisymmetric tensor; that form is what a Lorentz
// transformation conjugates.
struct DeformationMatrix {
  MatD q;

  static DeformationMatrix zero(int d);
  static DeformationMatrix standard2(double kappa);  // [[0, κ], [κ, 0]]
  static DeformationMatrix from_matrix(const MatD& q);

  int dimension() const { return q.rows; }
};

// Proper orthochronous Lorentz transformation: ΛᵀηΛ = η, det Λ = 1, Λ⁰₀ ≥ 1.
struct LorentzElement {
  MatD lambda;

  static LorentzElement boost2(double rapidity);
  static LorentzElement from_matrix(const MatD& m);

  int dimension() const { return lambda.rows; }
};

// Conjugates the tensor Qη by Λ and re-reads the result as a matrix. The
// admissibility invariant is re-validated; a residual above tolerance raises
// ConditioningError. In d = 2 the orbit is a fixed point: ΛTΛᵀ = det(Λ)·T for
// any antisymmetric 2×2 tensor T.
DeformationMatrix lorentz_transport(const DeformationMatrix& Q, const LorentzElement& L);

// Warp phase attached to the transition ΔP = P_i - P_j on top of state
// momentum P_j: η(ΔP, Q P_j). The alternate ordering uses P_i instead; both
// agree because η(x, Qx) = 0 for admissible Q.
double warp_phase(const DeformationMatrix& Q, const VecD& dP, const VecD& Pj);

// The same value evaluated through the restriction of the oscillatory
// integration to range(Qᵀ) = ker(Q)^⊥ in the Euclidean parametrization; for a
// trivial kernel this is a reparametrization, for Q = 0 it degenerates to the
// point evaluation at the origin.
double restricted_warp_phase(const DeformationMatrix& Q, const VecD& dP, const VecD& Pj);

struct WarpSettings {
  // "closed" multiplies each entry by the closed-form phase. "oscint-cutoff" /
  // "oscint-regularized" evaluate each distinct pure-phase oscillatory
  // integral numerically through the oscint engine (pair-factorized) as a
  // cross-check path.
  std::string method = "closed";
  CutoffSpec cutoff;
  OscQuadratureSpec quad;
};

// 𝒲_Q[A]: entry (i,j) of A times 𝕀_η(e^{i(QᵀηΔP)·θ + i(ηP_j)·ξ}). The basis
// supplies the summed on-shell momenta. Unimodular phases preserve column
// norms, so the truncated domain and the leakage accounting of A carry over.
FockOperator warp_operator(const FockOperator& A, const DeformationMatrix& Q,
                           const FockBasis& basis, const WarpSettings& settings = {});

struct WarpCheckReport {
  double max_abs_discrepancy = 0.0;
  size_t entries_checked = 0;
};

// Both orderings of the unitary factors (phase referenced to P_j vs P_i) on
// the vacuum column and one seeded random column.
WarpCheckReport alternate_form_check(const FockOperator& A, const DeformationMatrix& Q,
                                     const FockBasis& basis, std::uint64_t seed = 1);

// Full phases vs kernel-restricted phases across all nonzero entries.
WarpCheckReport kernel_restriction_check(const FockOperator& A, const DeformationMatrix& Q,
                                         const FockBasis& basis);

struct WarpedSymbolResult {
  Symbol symbol;        // (θ, ξ) ↦ <Ψ₁, U(Qθ) Φ(f) U(-Qθ) U(ξ) Ψ₂>, class (0, 0)
  double leakage = 0.0;
  double quad_error = 0.0;
};

WarpedSymbolResult warped_symbol(const std::vector<Complex>& psi1,
                                 const std::vector<Complex>& psi2, const TestFunction& f,
                                 const DeformationMatrix& Q, const FockBasis& basis);

struct WarpedFactor {
  DeformationMatrix q;
  TestFunction f;
};

struct WarpedNPointSpec {
  std::vector<Complex> psi;
  std::vector<WarpedFactor> factors;
  WarpSettings settings;        // method for the primary evaluation
  bool cross_check = false;     // rerun factors through the oscint path (n ≤ 2)
  std::string cross_check_method = "oscint-cutoff";
};

struct WarpedNPointResult {
  Complex value{0.0};
  bool headroom_ok = true;
  double leakage = 0.0;     // measured in an n-particle-enlarged basis
  double quad_error = 0.0;
  double cross_check_gap = 0.0;  // |oscint path - primary|; 0 when not requested
};

// <Ψ, 𝒲_{Q₁}[Φ(f₁)] … 𝒲_{Q_n}[Φ(f_n)] Ψ>
WarpedNPointResult warped_npoint(const WarpedNPointSpec& spec, const FockBasis& basis);

// Boosts move the momentum lattice off itself; the resampling map snaps each
// boosted mode to the nearest lattice momentum and reports the worst covector
// error. The map is rarely injective at large rapidity (the lattice is
// bounded), so the flag gates the permutation unitary.
struct BoostResample {
  std::vector<int> mode_map;
  double max_covector_error = 0.0;
  bool injective = true;
};

BoostResample boost_resample(const ModeLattice& lattice, double rapidity);

// Occupation-permutation unitary for an injective resampling map.
FockOperator lorentz_unitary(const BoostResample& resample, const FockBasis& basis);

// Exact boosted shell momenta as a lattice (order is preserved; the result is
// generally asymmetric and off-grid).
ModeLattice boosted_lattice(const ModeLattice& lattice, double rapidity);

// Covariance of the warp under a d=2 boost, split into its two layers: the
// exact lattice identity (warp phases built from boosted momenta agree with
// the originals, since Qη is boost-invariant in d=2 and the ladder matrices
// are momentum-blind), and the resampling layer (phases built from snapped
// momenta), whose gap must stay inside the budget linearized from the
// reported covector error.
struct BoostCovarianceReport {
  double exact_lattice_gap = 0.0;
  double resampled_gap = 0.0;
  double budget = 0.0;
  BoostResample resample;
};

BoostCovarianceReport boost_covariance_report(const TestFunction& f, const DeformationMatrix& Q,
                                              double rapidity, const FockBasis& basis);

}  // namespace warpfield
